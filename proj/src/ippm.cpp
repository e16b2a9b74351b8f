#include "hc/ippm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hc {

namespace {

double delta0(const HiddenConvexMeta& meta) {
  if (!meta.f1_lower || !meta.f1_upper)
    throw Error(ErrorCode::PreconditionViolated, "schedule needs f1_lower and f1_upper");
  return std::max(*meta.f1_upper - *meta.f1_lower, 1e-12);
}

std::int64_t ceil_count(double v) {
  if (!std::isfinite(v) || v > 1e15) return static_cast<std::int64_t>(1e15);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(v)));
}

// Shared part of the complexity-bound schedules: rho_hat, alpha, eps_in, N.
IppmConfig base_schedule(const HiddenConvexMeta& meta, double eps, double tau) {
  meta.validate();
  if (!(eps > 0.0) || !(tau > 0.0))
    throw Error(ErrorCode::InvalidArgument, "eps and tau must be positive");
  if (!(meta.rho > 0.0))
    throw Error(ErrorCode::PreconditionViolated, "rho_hat = 2 rho needs rho > 0");
  IppmConfig cfg;
  cfg.eps = eps;
  cfg.tau = tau;
  cfg.rho_hat = 2.0 * meta.rho;
  const double mu2 = meta.mu_c * meta.mu_c;
  const double du2 = meta.d_u * meta.d_u;
  const double eps_cap = 3.0 * cfg.rho_hat * du2 / (2.0 * mu2);
  const double tau_cap = cfg.rho_hat * du2 / (2.0 * mu2);
  if (eps > eps_cap)
    throw Error(ErrorCode::PreconditionViolated,
                "eps <= 3 rho_hat D_U^2 / (2 mu_c^2) fails (" + std::to_string(eps) + " > " +
                    std::to_string(eps_cap) + ")");
  if (tau > tau_cap)
    throw Error(ErrorCode::PreconditionViolated,
                "tau <= rho_hat D_U^2 / (2 mu_c^2) fails (" + std::to_string(tau) + " > " +
                    std::to_string(tau_cap) + ")");
  cfg.alpha = std::min(2.0 * mu2 * eps / (3.0 * cfg.rho_hat * du2), mu2 * tau / (cfg.rho_hat * du2));
  cfg.eps_in = cfg.alpha / 3.0 * std::min(eps, tau);
  cfg.n_outer = outer_iterations(meta, eps, tau);
  cfg.mu_strong = cfg.rho_hat - meta.rho;
  cfg.derived["delta0_surrogate"] = delta0(meta);
  cfg.derived["rho_hat"] = cfg.rho_hat;
  cfg.derived["alpha"] = cfg.alpha;
  cfg.derived["eps_in"] = cfg.eps_in;
  cfg.derived["n_outer"] = static_cast<double>(cfg.n_outer);
  return cfg;
}

void finish_acgd_schedule(IppmConfig& cfg, const HiddenConvexMeta& meta, const BoxSet& domain) {
  if (!meta.l_smooth) throw Error(ErrorCode::NonSmoothProblem, "ACGD needs l_smooth");
  cfg.inner_kind = InnerKind::ACGD;
  cfg.l_smooth = *meta.l_smooth;
  const double kappa = (cfg.l_smooth + cfg.rho_hat) / cfg.mu_strong;
  const double dx = domain.diameter();
  // Constant 1 inside the O~(sqrt(kappa)) bound; the log term evaluated explicitly.
  const double ratio = std::max((cfg.l_smooth + cfg.rho_hat) * dx * dx / cfg.eps_in, std::exp(1.0));
  cfg.t_inner = ceil_count(std::sqrt(kappa) * std::log(ratio));
  cfg.derived["kappa"] = kappa;
  cfg.derived["t_inner"] = static_cast<double>(cfg.t_inner);
  cfg.derived["shift_b"] = cfg.shift_b;
}

}  // namespace

const char* inner_kind_name(InnerKind k) {
  switch (k) {
    case InnerKind::SwSG: return "swsg";
    case InnerKind::ACGD: return "acgd";
    case InnerKind::SM: return "sm";
  }
  return "swsg";
}

ProxSubproblem build_prox_subproblem(const ConstrainedProblem& problem, const Vec& x_k,
                                     double rho_hat, double tau) {
  ProxSubproblem sub;
  sub.center = x_k;
  sub.tau = tau;
  sub.rho_hat = rho_hat;
  auto wrap = [&problem, x_k, rho_hat](bool first) {
    Oracle o;
    o.value = [&problem, x_k, rho_hat, first](const Vec& x) {
      double base = first ? problem.f1(x) : problem.f2(x);
      return base + 0.5 * rho_hat * (x - x_k).squaredNorm();
    };
    o.first_order = [&problem, x_k, rho_hat, first](const Vec& x) {
      FirstOrder r = first ? problem.f1_first_order(x) : problem.f2_first_order(x);
      Vec d = x - x_k;
      r.value += 0.5 * rho_hat * d.squaredNorm();
      r.grad += rho_hat * d;
      return r;
    };
    return o;
  };
  sub.phi1 = wrap(true);
  sub.phi2 = wrap(false);
  return sub;
}

InnerResult ippm_inner_step(const ConstrainedProblem& problem, const ProxSubproblem& sub,
                            const IppmConfig& cfg) {
  const OracleCounter* budget = &problem.counter();
  switch (cfg.inner_kind) {
    case InnerKind::SwSG: {
      SwsgParams p;
      p.t_in = cfg.t_inner;
      p.tau = cfg.tau;
      p.alpha = cfg.alpha;
      p.eps_in = cfg.eps_in;
      p.mu_strong = cfg.mu_strong;
      if (cfg.swsg_step_scale) {
        double c = *cfg.swsg_step_scale;
        p.steps = [c](std::int64_t t) { return c / (static_cast<double>(t) + 1.0); };
      }
      return swsg(sub.phi1, sub.phi2, sub.center, problem.domain(), p, budget);
    }
    case InnerKind::ACGD: {
      if (!problem.smooth()) throw Error(ErrorCode::NonSmoothProblem, "ACGD needs a smooth problem");
      AcgdSchedule s =
          cfg.mu_strong > 0.0
              ? AcgdSchedule::strongly_convex(cfg.l_smooth, cfg.rho_hat, cfg.mu_strong, cfg.t_inner)
              : AcgdSchedule::convex(cfg.l_smooth + cfg.rho_hat, cfg.t_inner, cfg.acgd_eta_scale);
      return acgd(sub.phi1, sub.phi2, sub.center, problem.domain(), cfg.t_inner, cfg.shift_b, cfg.tau,
                  s, cfg.qp_tol, budget);
    }
    case InnerKind::SM: {
      // Unconstrained inner solve: the constraint is ignored.
      double mu = cfg.mu_strong;
      SubgradientOptions opt;
      opt.budget = budget;
      auto r = projected_subgradient(
          sub.phi1, problem.domain(), sub.center, cfg.t_inner,
          [mu](std::int64_t t) { return 2.0 / (mu * (static_cast<double>(t) + 2.0)); }, opt);
      InnerResult out;
      out.point = r.best;
      out.steps_used = r.steps_used;
      out.feasible = true;
      out.phi2_value = problem.peek_f2(r.best) + 0.5 * cfg.rho_hat * (r.best - sub.center).squaredNorm();
      return out;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown inner solver");
}

SolveReport ippm_run(const ConstrainedProblem& problem, const HiddenConvexMeta& meta, const Vec& x0,
                     const IppmConfig& cfg) {
  (void)meta;
  if (!(cfg.rho_hat > meta.rho) && cfg.inner_kind == InnerKind::SwSG && cfg.mu_strong <= 0.0 &&
      !cfg.swsg_step_scale)
    throw Error(ErrorCode::PreconditionViolated, "rho_hat must exceed rho");
  // Feasibility of the start is a precondition check, not part of the method.
  if (cfg.inner_kind != InnerKind::SM && problem.peek_f2(x0) > cfg.tau)
    throw Error(ErrorCode::InfeasibleStart,
                "F2(x0) = " + std::to_string(problem.peek_f2(x0)) + " exceeds tau");

  OracleCounter& counter = problem.counter();
  BudgetScope scope(counter, cfg.budget);
  const std::int64_t start = counter.total();

  SolveReport rep;
  rep.trace = Trace(1.0, start);
  rep.x = x0;
  rep.trace.record(problem, x0, IterKind::Outer);
  rep.iterates.push_back(x0);

  for (std::int64_t k = 0; k < cfg.n_outer; ++k) {
    if (!counter.can_afford(3)) {
      rep.notes.push_back("budget exhausted after " + std::to_string(k) + " outer iterations");
      break;
    }
    ProxSubproblem sub = build_prox_subproblem(problem, rep.x, cfg.rho_hat, cfg.tau);
    InnerResult in;
    try {
      in = ippm_inner_step(problem, sub, cfg);
    } catch (const Error& e) {
      throw Error(e.code(), "outer iteration " + std::to_string(k) + ": " + e.what());
    }
    if (in.steps_used == 0) break;
    if (!in.feasible)
      throw Error(ErrorCode::InnerSolverFailed,
                  "outer iteration " + std::to_string(k) + ": inner output has phi2 = " +
                      std::to_string(in.phi2_value) + " > tau");
    if (!in.averaged) rep.notes.push_back("outer " + std::to_string(k) + ": fallback iterate");
    rep.x = in.point;
    rep.trace.record(problem, rep.x, IterKind::Outer);
    rep.iterates.push_back(rep.x);
  }

  rep.f1 = problem.peek_f1(rep.x);
  rep.f2 = problem.peek_f2(rep.x);
  rep.oracle_calls = counter.total() - start;
  rep.params = cfg.derived;
  rep.params["rho_hat"] = cfg.rho_hat;
  rep.params["tau"] = cfg.tau;
  rep.params["eps"] = cfg.eps;
  rep.params["eps_in"] = cfg.eps_in;
  rep.params["alpha"] = cfg.alpha;
  rep.params["n_outer"] = static_cast<double>(cfg.n_outer);
  rep.params["t_inner"] = static_cast<double>(cfg.t_inner);
  if (cfg.inner_kind == InnerKind::ACGD) rep.params["shift_b"] = cfg.shift_b;
  return rep;
}

std::int64_t outer_iterations(const HiddenConvexMeta& meta, double eps, double tau) {
  const double mu2 = meta.mu_c * meta.mu_c;
  const double du2 = meta.d_u * meta.d_u;
  const double lead = std::max(3.0 * meta.rho * du2 / (mu2 * eps), 2.0 * meta.rho * du2 / (mu2 * tau));
  const double lg = std::max(std::log(3.0 * delta0(meta) / eps), 1.0);
  return ceil_count(lead * lg);
}

IppmConfig schedule_nonsmooth(const HiddenConvexMeta& meta, const BoxSet& domain, double eps,
                              double tau) {
  IppmConfig cfg = base_schedule(meta, eps, tau);
  cfg.inner_kind = InnerKind::SwSG;
  const double mu2 = meta.mu_c * meta.mu_c;
  const double du2 = meta.d_u * meta.d_u;
  const double m = std::min(eps, tau);
  const double f2_low = meta.f2_lower.value_or(0.0);
  const double g2 = meta.g_bound * meta.g_bound;
  const double a = 216.0 * (3.0 * g2 - 4.0 * meta.rho * std::min(f2_low, 0.0)) * du2 / (mu2 * m * m);
  const double b = 51.0 * meta.rho * domain.diameter() * meta.d_u / (meta.mu_c * m);
  cfg.t_inner = ceil_count(std::max(a, b));
  cfg.derived["t_inner"] = static_cast<double>(cfg.t_inner);
  return cfg;
}

IppmConfig schedule_smooth(const HiddenConvexMeta& meta, const BoxSet& domain, double eps,
                           double tau) {
  IppmConfig cfg = base_schedule(meta, eps, tau);
  cfg.shift_b = choose_shift(meta, cfg.rho_hat, tau, eps, std::nullopt);
  finish_acgd_schedule(cfg, meta, domain);
  return cfg;
}

IppmConfig schedule_smooth_slater(const HiddenConvexMeta& meta, const BoxSet& domain, double eps,
                                  double tau) {
  if (!meta.theta_slater)
    throw Error(ErrorCode::PreconditionViolated, "Slater schedule needs theta_slater");
  IppmConfig cfg = base_schedule(meta, eps, tau);
  const double ratio = meta.mu_c * meta.mu_c * *meta.theta_slater / (cfg.rho_hat * meta.d_u * meta.d_u);
  if (ratio > 1.0) {
    // Stated as a precondition; beta is capped at 1 instead of refusing.
    cfg.warnings.push_back("mu_c^2 theta / (rho_hat D_U^2) > 1; beta capped at 1");
  }
  cfg.shift_b = choose_shift(meta, cfg.rho_hat, tau, eps, meta.theta_slater);
  cfg.derived["beta"] = std::min(1.0, ratio);
  finish_acgd_schedule(cfg, meta, domain);
  return cfg;
}

IppmConfig schedule_hsc(const HiddenConvexMeta& meta, const BoxSet& domain, double eps, double tau) {
  if (!meta.mu_h) throw Error(ErrorCode::MissingMuH, "hidden strong convexity modulus not set");
  if (*meta.mu_h < 1e-12) throw Error(ErrorCode::MissingMuH, "mu_H below 1e-12");
  IppmConfig cfg = base_schedule(meta, eps, tau);
  const double s = meta.mu_c * meta.mu_c * *meta.mu_h;
  cfg.alpha = s / (cfg.rho_hat + s);
  cfg.eps_in = cfg.alpha * eps / 2.0;
  cfg.n_outer = ceil_count((cfg.rho_hat + s) / s * std::max(std::log(2.0 * delta0(meta) / eps), 1.0));
  cfg.inner_kind = meta.l_smooth ? InnerKind::ACGD : InnerKind::SwSG;
  if (cfg.inner_kind == InnerKind::ACGD) {
    cfg.shift_b = -tau + cfg.alpha * tau / 3.0;
    finish_acgd_schedule(cfg, meta, domain);
  } else {
    IppmConfig ns = schedule_nonsmooth(meta, domain, eps, tau);
    cfg.t_inner = ns.t_inner;
  }
  cfg.derived["alpha"] = cfg.alpha;
  cfg.derived["eps_in"] = cfg.eps_in;
  cfg.derived["n_outer"] = static_cast<double>(cfg.n_outer);
  return cfg;
}

FeasibleStart init_feasible(const ConstrainedProblem& problem, const HiddenConvexMeta& meta,
                            const Vec& x_any, double tau, std::int64_t max_steps) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  const double dx = problem.domain().diameter();
  const double scale = std::isfinite(dx) ? dx : 1.0;
  const double g = meta.g_bound;
  SubgradientOptions opt;
  opt.stop_below = tau;
  opt.budget = &problem.counter();
  auto r = projected_subgradient(
      problem.f2_oracle(), problem.domain(), x_any, max_steps,
      [scale, g](std::int64_t t) { return scale / (g * std::sqrt(static_cast<double>(t) + 1.0)); }, opt);
  if (r.best_value > tau)
    throw Error(ErrorCode::FeasibilityNotReached,
                "best F2 = " + std::to_string(r.best_value) + " after " + std::to_string(r.steps_used) +
                    " steps");
  return FeasibleStart{r.best, r.steps_used};
}

}  // namespace hc
