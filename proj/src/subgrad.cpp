#include "hc/subgrad.hpp"

#include <limits>

namespace hc {

SubgradientResult projected_subgradient(const Oracle& f, const BoxSet& set, const Vec& x0,
                                        std::int64_t steps, const StepSchedule& eta,
                                        const SubgradientOptions& opt) {
  SubgradientResult out;
  out.best = x0;
  out.best_value = std::numeric_limits<double>::infinity();
  Vec z = x0;
  // Step t evaluates z_t; the final iterate is scored too, hence steps + 1 queries.
  for (std::int64_t t = 0; t <= steps; ++t) {
    if (opt.budget && !opt.budget->can_afford(1)) break;
    FirstOrder fo = f.first_order(z);
    if (fo.value < out.best_value) {
      out.best_value = fo.value;
      out.best = z;
    }
    out.steps_used = t;
    if (opt.stop_below && fo.value <= *opt.stop_below) break;
    if (t == steps) break;
    z = project_box(set, z - eta(t) * fo.grad);
  }
  return out;
}

double swsg_stepsize(std::int64_t t, double mu_strong) {
  if (t < 0) throw Error(ErrorCode::InvalidArgument, "stepsize index must be non-negative");
  if (!(mu_strong > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu_strong must be positive");
  double tt = static_cast<double>(t);
  return 2.0 / (mu_strong * (tt + 2.0) + 144.0 * mu_strong / (tt + 1.0));
}

InnerResult swsg(const Oracle& phi1, const Oracle& phi2, const Vec& x_k, const BoxSet& set,
                 const SwsgParams& p, const OracleCounter* budget) {
  const double shift = -p.tau + p.alpha * p.tau / 3.0;
  Vec z = x_k;
  Vec acc = Vec::Zero(x_k.size());
  double wsum = 0.0;
  // Fallback: the feasible-step iterate with the lowest phi1 and phi2 <= tau.
  Vec fallback;
  double fallback_phi1 = std::numeric_limits<double>::infinity();
  double fallback_phi2 = 0.0;

  InnerResult out;
  std::int64_t t = 0;
  for (; t < p.t_in; ++t) {
    // Two calls for this step plus one for the final check.
    if (budget && !budget->can_afford(3)) break;
    FirstOrder c = phi2.first_order(z);
    double eta = p.steps ? p.steps(t) : swsg_stepsize(t, p.mu_strong);
    if (c.value + shift <= p.eps_in) {
      FirstOrder o = phi1.first_order(z);
      double w = static_cast<double>(t) + 1.0;
      acc += w * z;
      wsum += w;
      if (c.value <= p.tau && o.value < fallback_phi1) {
        fallback_phi1 = o.value;
        fallback_phi2 = c.value;
        fallback = z;
      }
      z = project_box(set, z - eta * o.grad);
    } else {
      z = project_box(set, z - eta * c.grad);
    }
  }
  out.steps_used = t;
  if (wsum == 0.0) throw Error(ErrorCode::EmptyFeasibleSet, "no feasible step taken by SwSG");

  out.point = project_box(set, acc / wsum);
  out.phi2_value = phi2.value(out.point);
  out.feasible = out.phi2_value <= p.tau;
  if (!out.feasible && fallback.size() > 0) {
    out.point = fallback;
    out.phi2_value = fallback_phi2;
    out.feasible = true;
    out.averaged = false;
  }
  return out;
}

}  // namespace hc
