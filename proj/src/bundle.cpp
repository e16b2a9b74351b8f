#include "hc/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hc {

namespace {

std::int64_t ceil_steps(double v) {
  if (!std::isfinite(v) || v > 1e12) return static_cast<std::int64_t>(1e12);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(v)));
}

void require_smooth(const ConstrainedProblem& problem, const char* who) {
  if (!problem.smooth())
    throw Error(ErrorCode::NonSmoothProblem, std::string(who) + " needs L-smooth F1 and F2");
}

double l_or_throw(const HiddenConvexMeta& meta) {
  if (!meta.l_smooth) throw Error(ErrorCode::NonSmoothProblem, "schedule needs l_smooth");
  return *meta.l_smooth;
}

std::vector<Halfspace> sbl_cuts(const Vec& x_t, const FirstOrder& f1, const FirstOrder& f2,
                                double eta, const BundleConfig& cfg) {
  const double ab = cfg.alpha * cfg.beta;
  const double rhs1 = (1.0 - ab) * f1.value + ab * eta +
                      (1.0 - cfg.beta) * cfg.alpha * cfg.lambda * positive_part(f2.value) + cfg.tau;
  const double rhs2 = (1.0 - cfg.alpha) * f2.value + cfg.tau;
  return {linear_minorant(f1.value, f1.grad, x_t, rhs1), linear_minorant(f2.value, f2.grad, x_t, rhs2)};
}

}  // namespace

Halfspace linear_minorant(double f_value, const Vec& grad, const Vec& y, double rhs) {
  return Halfspace{grad, rhs - f_value + grad.dot(y)};
}

std::optional<Vec> sbl_project(const BoxSet& set, const Vec& x_t, const FirstOrder& f1,
                               const FirstOrder& f2, double eta, const BundleConfig& cfg) {
  ProjectionResult r = project_box_halfspaces(set, x_t, sbl_cuts(x_t, f1, f2, eta, cfg), cfg.qp_tol);
  if (!r.feasible) return std::nullopt;
  return r.x;
}

SblStepResult sbl_step(const ConstrainedProblem& problem, const Vec& x_t, double eta,
                       const BundleConfig& cfg) {
  FirstOrder f1 = problem.f1_first_order(x_t);
  FirstOrder f2 = problem.f2_first_order(x_t);
  SblStepResult out;
  out.f1 = f1.value;
  out.f2 = f2.value;
  out.next = sbl_project(problem.domain(), x_t, f1, f2, eta, cfg);
  return out;
}

StarBlParams star_bl_schedule(const HiddenConvexMeta& meta, double eps, double v0) {
  meta.validate();
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const double l = l_or_throw(meta);
  const double mu2 = meta.mu_c * meta.mu_c;
  const double du2 = meta.d_u * meta.d_u;
  StarBlParams p;
  p.alpha = std::min(1.0, eps * mu2 / ((meta.rho + l) * du2));
  p.tau = meta.rho * p.alpha * p.alpha * du2 / (2.0 * mu2);
  const double lg = std::max(std::log(2.0 * std::max(v0, 0.0) / eps), 1.0);
  p.t_steps = ceil_steps((meta.rho + l) * du2 / (mu2 * eps) * lg);
  return p;
}

SolveReport s_star_bl(const ConstrainedProblem& problem, const HiddenConvexMeta& meta, const Vec& x0,
                      double f1_star, double eps, std::optional<StarBlParams> overrides,
                      std::optional<std::int64_t> budget) {
  require_smooth(problem, "S-StarBL");
  // v(x0, F1*) only sizes the schedule; read uncounted like other precondition checks.
  const double v0 = std::max(problem.peek_f1(x0) - f1_star, problem.peek_f2(x0));
  StarBlParams p = overrides ? *overrides : star_bl_schedule(meta, eps, v0);
  if (p.alpha < 0.0 || p.alpha > 1.0) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0,1]");

  BundleConfig cfg;
  cfg.alpha = p.alpha;
  cfg.beta = 1.0;
  cfg.tau = p.tau;
  cfg.t_steps = p.t_steps;

  OracleCounter& counter = problem.counter();
  BudgetScope scope(counter, budget);
  const std::int64_t start = counter.total();

  SolveReport rep;
  rep.trace = Trace(1.0, start);
  rep.x = x0;
  rep.trace.record(problem, x0, IterKind::Outer, f1_star);
  rep.iterates.push_back(x0);
  for (std::int64_t t = 0; t < p.t_steps; ++t) {
    if (!counter.can_afford(2)) {
      rep.notes.push_back("budget exhausted after " + std::to_string(t) + " steps");
      break;
    }
    SblStepResult s = sbl_step(problem, rep.x, f1_star, cfg);
    if (!s.next)
      throw Error(ErrorCode::QpInfeasible,
                  "step " + std::to_string(t) + ": shifted cuts miss the domain (F1 = " +
                      std::to_string(s.f1) + ", F2 = " + std::to_string(s.f2) +
                      "); is f1_star the true optimum?");
    rep.x = *s.next;
    rep.trace.record(problem, rep.x, IterKind::Outer, f1_star);
    rep.iterates.push_back(rep.x);
  }
  rep.f1 = problem.peek_f1(rep.x);
  rep.f2 = problem.peek_f2(rep.x);
  rep.oracle_calls = counter.total() - start;
  rep.params = {{"alpha", p.alpha},
                {"tau", p.tau},
                {"t_steps", static_cast<double>(p.t_steps)},
                {"f1_star", f1_star},
                {"eps", eps}};
  return rep;
}

std::vector<Vec> star_bl_demo(const ConstrainedProblem& problem, const Vec& x0, double f1_star,
                              std::int64_t steps, double alpha, double tau) {
  BundleConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = 1.0;
  cfg.tau = tau;
  const BoxSet free_space = BoxSet::unbounded(problem.dim());
  std::vector<Vec> out{x0};
  Vec x = x0;
  for (std::int64_t t = 0; t < steps; ++t) {
    FirstOrder f1 = problem.f1_first_order(x);
    FirstOrder f2 = problem.f2_first_order(x);
    // Cut projection in R^d, then clipped to X: the box never enters the cuts.
    auto y = sbl_project(free_space, x, f1, f2, f1_star, cfg);
    if (!y) break;
    x = project_box(problem.domain(), *y);
    out.push_back(x);
  }
  return out;
}

std::vector<Vec> star_bl_unshifted_demo(const ConstrainedProblem& problem, const Vec& x0,
                                        double f1_star, std::int64_t steps) {
  return star_bl_demo(problem, x0, f1_star, steps, 1.0, 0.0);
}

SblResult s_bl(const ConstrainedProblem& problem, const Vec& x0, double eta, const BundleConfig& cfg,
               Trace* trace) {
  require_smooth(problem, "S-BL");
  OracleCounter& counter = problem.counter();
  SblResult res;
  res.best = x0;
  res.best_penalty = std::numeric_limits<double>::infinity();
  Vec x = x0;

  auto score = [&](const Vec& p, double f1, double f2) {
    const double pen = f1 + cfg.lambda * positive_part(f2);
    res.penalties.push_back(pen);
    res.iterates.push_back(p);
    // Strict '<' keeps the earliest minimizer.
    if (pen < res.best_penalty) {
      res.best_penalty = pen;
      res.best = p;
      res.best_f1 = f1;
      res.best_f2 = f2;
    }
  };

  for (std::int64_t t = 0; t < cfg.t_steps; ++t) {
    if (!counter.can_afford(2)) {
      res.truncated = true;
      break;
    }
    SblStepResult s = sbl_step(problem, x, eta, cfg);
    score(x, s.f1, s.f2);
    if (!s.next) {
      res.truncated = true;
      return res;
    }
    x = *s.next;
    ++res.steps_taken;
    if (trace) trace->record(problem, x, IterKind::Inner, eta);
  }
  // x_T still needs its own values to be scored.
  if (counter.can_afford(2)) {
    const double f1 = problem.f1(x);
    const double f2 = problem.f2(x);
    score(x, f1, f2);
  } else if (res.penalties.empty()) {
    // Nothing affordable: fall back to x0 with uncounted values so the caller has a score.
    res.truncated = true;
    score(x0, problem.peek_f1(x0), problem.peek_f2(x0));
  } else {
    res.truncated = true;
  }
  return res;
}

AdaLsParams ada_ls_schedule(const HiddenConvexMeta& meta, double f1_x0, double eta0, double eps,
                            double lambda) {
  meta.validate();
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (!(f1_x0 > eta0))
    throw Error(ErrorCode::PreconditionViolated, "eta0 must lie below F1(x0)");
  const double l = l_or_throw(meta);
  const double mu2 = meta.mu_c * meta.mu_c;
  const double du2 = meta.d_u * meta.d_u;
  const double a = (meta.rho + l) * du2 / (2.0 * mu2);
  const double lg = std::max(std::log(8.0 * (f1_x0 - eta0) / eps), 1.0);
  AdaLsParams p;
  p.beta = 0.5;
  p.alpha = eps / (16.0 * a);
  if (lambda > 0.0) p.alpha = std::min(p.alpha, eps / (8.0 * lambda * a * lg));
  p.alpha = std::min(p.alpha, 1.0);
  p.t_steps = ceil_steps(2.0 / p.alpha * lg);
  const double surrogate = meta.f1_upper.value_or(f1_x0);
  p.n_epochs = ceil_steps(std::log2(std::max((surrogate - eta0) / eps, 2.0)));
  p.tau = meta.rho * p.alpha * p.alpha * du2 / (2.0 * mu2);
  return p;
}

SolveReport ada_ls(const ConstrainedProblem& problem, const HiddenConvexMeta& meta, const Vec& x0,
                   double eta0, double eps, double lambda, std::optional<AdaLsParams> overrides,
                   std::optional<std::int64_t> budget, EtaState* state) {
  require_smooth(problem, "Ada-LS");
  if (lambda < 0.0) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  const double f2_x0 = problem.peek_f2(x0);
  if (lambda > 0.0 && positive_part(f2_x0) > eps / (2.0 * lambda))
    throw Error(ErrorCode::PreconditionViolated,
                "[F2(x0)]+ = " + std::to_string(f2_x0) + " exceeds eps / (2 lambda)");
  AdaLsParams p = overrides ? *overrides : ada_ls_schedule(meta, problem.peek_f1(x0), eta0, eps, lambda);

  BundleConfig cfg;
  cfg.alpha = p.alpha;
  cfg.beta = p.beta;
  cfg.lambda = lambda;
  cfg.tau = p.tau;
  cfg.eta0 = eta0;
  cfg.t_steps = p.t_steps;
  cfg.n_epochs = p.n_epochs;

  OracleCounter& counter = problem.counter();
  BudgetScope scope(counter, budget);
  const std::int64_t start = counter.total();

  SolveReport rep;
  rep.trace = Trace(lambda, start);
  rep.x = x0;
  rep.trace.record(problem, x0, IterKind::Epoch, eta0);

  EtaState local;
  EtaState& eta = state ? *state : local;
  eta.eta_k = eta0;
  eta.history.clear();
  double best = std::numeric_limits<double>::infinity();
  std::int64_t epochs_run = 0;
  for (std::int64_t k = 0; k < p.n_epochs; ++k) {
    if (!counter.can_afford(2)) {
      rep.notes.push_back("budget exhausted after " + std::to_string(k) + " epochs");
      break;
    }
    // Every epoch restarts from x0; only eta carries over.
    SblResult r = s_bl(problem, x0, eta.eta_k, cfg, &rep.trace);
    ++epochs_run;
    if (r.truncated)
      rep.notes.push_back("epoch " + std::to_string(k) + " truncated after " +
                          std::to_string(r.steps_taken) + " steps");
    eta.history.emplace_back(eta.eta_k, r.best_penalty);
    if (r.best_penalty < best) {
      best = r.best_penalty;
      rep.x = r.best;
    }
    rep.iterates.push_back(r.best);
    const double next =
        (1.0 - p.beta) * (eta.eta_k + r.best_penalty) - (1.0 - 2.0 * p.beta) * eta.eta_k;
    rep.trace.record(problem, r.best, IterKind::Epoch, eta.eta_k);
    eta.eta_k = next;
  }
  rep.f1 = problem.peek_f1(rep.x);
  rep.f2 = problem.peek_f2(rep.x);
  rep.oracle_calls = counter.total() - start;
  rep.params = {{"alpha", p.alpha},
                {"beta", p.beta},
                {"tau", p.tau},
                {"lambda", lambda},
                {"eta0", eta0},
                {"t_steps", static_cast<double>(p.t_steps)},
                {"n_epochs", static_cast<double>(p.n_epochs)},
                {"epochs_run", static_cast<double>(epochs_run)},
                {"eps", eps}};
  return rep;
}

LowerBoundInit init_lower_bound(const ConstrainedProblem& problem, const HiddenConvexMeta& meta,
                                const Vec& x0, double eps, std::int64_t max_steps) {
  require_smooth(problem, "init_lower_bound");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const double l = l_or_throw(meta);
  const double mu2 = meta.mu_c * meta.mu_c;
  std::int64_t n = max_steps > 0
                       ? max_steps
                       : std::min<std::int64_t>(
                             ceil_steps((meta.rho + l) * meta.d_u * meta.d_u / (mu2 * eps)), 1000000);
  LowerBoundInit out;
  Vec z = project_box(problem.domain(), x0);
  for (std::int64_t t = 0; t < n; ++t) {
    Vec g = problem.f1_first_order(z).grad;
    Vec next = project_box(problem.domain(), z - g / l);
    ++out.steps;
    const double moved = (next - z).norm();
    z = std::move(next);
    if (moved <= 1e-13 * (1.0 + z.norm())) break;
  }
  out.z = z;
  const double f1 = problem.f1(z);
  const double f2 = problem.f2(z);
  if (f2 <= eps) {
    out.early_exit = z;
    out.eta0 = f1;
  } else {
    out.eta0 = f1 - eps;
  }
  return out;
}

}  // namespace hc
