#include "hc/acgd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hc {

AcgdSchedule AcgdSchedule::strongly_convex(double l_smooth, double rho_hat, double mu_strong,
                                           std::int64_t t_in) {
  if (!(mu_strong > 0.0)) throw Error(ErrorCode::InvalidArgument, "ACGD needs rho_hat > rho");
  AcgdSchedule s;
  s.kappa = std::max((l_smooth + rho_hat) / mu_strong, 1.0 + 1e-12);
  double r = std::sqrt(s.kappa);
  // r = 1 would make tau vanish; a tiny floor keeps the recursion defined.
  double tau = std::max(r - 1.0, 1e-12);
  double q = 1.0 - 1.0 / r;
  for (std::int64_t t = 1; t <= t_in; ++t) {
    s.theta.push_back((r - 1.0) / (r + 1.0));
    s.tau.push_back(tau);
    s.eta.push_back((l_smooth + rho_hat) / r);
    s.log_omega.push_back(q > 0.0 ? -static_cast<double>(t) * std::log(q) : 0.0);
  }
  return s;
}

AcgdSchedule AcgdSchedule::convex(double l_smooth, std::int64_t t_in, double eta_scale) {
  if (!(l_smooth > 0.0)) throw Error(ErrorCode::InvalidArgument, "ACGD needs l_smooth > 0");
  AcgdSchedule s;
  s.kappa = 0.0;
  for (std::int64_t t = 1; t <= t_in; ++t) {
    const double tt = static_cast<double>(t);
    s.theta.push_back((tt - 1.0) / tt);
    s.tau.push_back((tt - 1.0) / 2.0);
    s.eta.push_back(eta_scale * l_smooth / tt);
    s.log_omega.push_back(std::log(tt));
  }
  return s;
}

AcgdSchedule AcgdSchedule::plain(double eta, std::int64_t t_in) {
  AcgdSchedule s;
  s.theta.assign(t_in, 0.0);
  s.tau.assign(t_in, 0.0);
  s.eta.assign(t_in, eta);
  s.log_omega.assign(t_in, 0.0);
  return s;
}

InnerResult acgd(const Oracle& phi1, const Oracle& phi2, const Vec& x_k, const BoxSet& set,
                 std::int64_t t_in, double shift_b, double tau, const AcgdSchedule& schedule,
                 double qp_tol, const OracleCounter* budget) {
  if (static_cast<std::int64_t>(schedule.eta.size()) < t_in)
    throw Error(ErrorCode::InvalidArgument, "ACGD schedule shorter than t_in");
  Vec z_prev2 = x_k, z_prev = x_k, zbar = x_k;
  std::vector<Vec> zs;
  zs.reserve(static_cast<std::size_t>(t_in));
  // Fallback: the extrapolated point with phi2 <= tau and the lowest phi1, from
  // values the loop already paid for.
  Vec fallback;
  double fallback_phi1 = std::numeric_limits<double>::infinity();
  double fallback_phi2 = 0.0;

  InnerResult out;
  std::int64_t t = 1;
  for (; t <= t_in; ++t) {
    if (budget && !budget->can_afford(3)) break;
    const std::size_t i = static_cast<std::size_t>(t - 1);
    Vec ztilde = z_prev + schedule.theta[i] * (z_prev - z_prev2);
    zbar = (schedule.tau[i] * zbar + ztilde) / (1.0 + schedule.tau[i]);
    FirstOrder o = phi1.first_order(zbar);
    FirstOrder c = phi2.first_order(zbar);
    if (c.value <= tau && o.value < fallback_phi1) {
      fallback_phi1 = o.value;
      fallback_phi2 = c.value;
      fallback = zbar;
    }
    ProjectionResult qp =
        solve_acgd_qp(o.grad, z_prev, schedule.eta[i], c.grad, zbar, c.value + shift_b, set, qp_tol);
    if (!qp.feasible)
      throw Error(ErrorCode::QpInfeasible,
                  "ACGD linearized constraint empties the box at step " + std::to_string(t));
    zs.push_back(qp.x);
    z_prev2 = z_prev;
    z_prev = qp.x;
  }
  out.steps_used = static_cast<std::int64_t>(zs.size());
  if (zs.empty()) {
    out.point = x_k;
    out.feasible = false;
    out.averaged = false;
    return out;
  }

  double top = *std::max_element(schedule.log_omega.begin(), schedule.log_omega.begin() + zs.size());
  Vec acc = Vec::Zero(x_k.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    double w = std::exp(schedule.log_omega[i] - top);
    acc += w * zs[i];
    wsum += w;
  }
  out.point = project_box(set, acc / wsum);
  out.phi2_value = phi2.value(out.point);
  out.feasible = out.phi2_value <= tau;
  if (!out.feasible && fallback.size() > 0) {
    out.point = fallback;
    out.phi2_value = fallback_phi2;
    out.feasible = true;
    out.averaged = false;
  }
  return out;
}

double choose_shift(const HiddenConvexMeta& meta, double rho_hat, double tau, double eps,
                    std::optional<double> slater_theta) {
  if (!(tau > 0.0) || !(eps > 0.0))
    throw Error(ErrorCode::InvalidArgument, "tau and eps must be positive");
  const double scale = meta.mu_c * meta.mu_c / (rho_hat * meta.d_u * meta.d_u);
  if (slater_theta) {
    double beta = std::min(1.0, scale * *slater_theta);
    return -tau + beta * *slater_theta / 3.0;
  }
  double alpha = std::min({2.0 * scale * eps / 3.0, scale * tau, 1.0});
  return -tau + alpha * tau / 3.0;
}

}  // namespace hc
