#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hc/core.hpp"

namespace hc {

struct BundleConfig {
  double alpha = 0.0;
  double beta = 1.0;
  double lambda = 0.0;
  double tau = 0.0;
  double eta0 = 0.0;
  std::int64_t t_steps = 0;
  std::int64_t n_epochs = 1;
  double qp_tol = 0.0;
  std::optional<std::int64_t> budget;
};

struct EtaState {
  double eta_k = 0.0;
  std::vector<std::pair<double, double>> history;  // (eta, penalty of the epoch output)
};

// Halfspace form of l_F(x, y) <= rhs, with l_F(x, y) = F(y) + <g, x - y>.
Halfspace linear_minorant(double f_value, const Vec& grad, const Vec& y, double rhs);

struct SblStepResult {
  std::optional<Vec> next;  // empty when the shifted cuts miss the box
  double f1 = 0.0;
  double f2 = 0.0;
};

// One projection onto the shifted cuts at x_t, given F1/F2 first-order data there.
std::optional<Vec> sbl_project(const BoxSet& set, const Vec& x_t, const FirstOrder& f1,
                               const FirstOrder& f2, double eta, const BundleConfig& cfg);

// Evaluates F1 and F2 at x_t (two calls) and projects.
SblStepResult sbl_step(const ConstrainedProblem& problem, const Vec& x_t, double eta,
                       const BundleConfig& cfg);

struct StarBlParams {
  double alpha = 0.0;
  double tau = 0.0;
  std::int64_t t_steps = 0;
};

// alpha = eps mu_c^2 / ((rho + L) D_U^2), tau = rho alpha^2 D_U^2 / (2 mu_c^2),
// T = (1/alpha) log(2 v0 / eps).
StarBlParams star_bl_schedule(const HiddenConvexMeta& meta, double eps, double v0);

// Shifted star bundle-level; returns the last iterate. When `overrides` is
// given it replaces the derived schedule.
SolveReport s_star_bl(const ConstrainedProblem& problem, const HiddenConvexMeta& meta, const Vec& x0,
                      double f1_star, double eps, std::optional<StarBlParams> overrides = std::nullopt,
                      std::optional<std::int64_t> budget = std::nullopt);

// Polyak-style star bundle-level on the cosine example: the cut projection is
// taken in R^d and then clipped to the box. alpha = 1, tau = 0 is the unshifted
// rule, whose cuts sit at level F1* and 0.
std::vector<Vec> star_bl_demo(const ConstrainedProblem& problem, const Vec& x0, double f1_star,
                              std::int64_t steps, double alpha, double tau);
std::vector<Vec> star_bl_unshifted_demo(const ConstrainedProblem& problem, const Vec& x0,
                                        double f1_star, std::int64_t steps);

struct SblResult {
  Vec best;
  double best_penalty = 0.0;
  double best_f1 = 0.0;
  double best_f2 = 0.0;
  std::int64_t steps_taken = 0;
  bool truncated = false;
  std::vector<double> penalties;
  std::vector<Vec> iterates;
};

// Shifted bundle-level epoch; returns the best-penalty iterate among x_0..x_T.
SblResult s_bl(const ConstrainedProblem& problem, const Vec& x0, double eta, const BundleConfig& cfg,
               Trace* trace = nullptr);

struct AdaLsParams {
  double alpha = 0.0;
  double beta = 0.5;
  double tau = 0.0;
  std::int64_t t_steps = 0;
  std::int64_t n_epochs = 0;
};

// beta = 1/2, A = (rho + L) D_U^2 / (2 mu_c^2), alpha = min{eps/(16A), eps/(8 lambda A log(8 gap0/eps))},
// T = (2/alpha) log(8 gap0 / eps), N = ceil(log2((f1_surrogate - eta0)/eps)), tau = rho alpha^2 D_U^2/(2 mu_c^2).
AdaLsParams ada_ls_schedule(const HiddenConvexMeta& meta, double f1_x0, double eta0, double eps,
                            double lambda);

SolveReport ada_ls(const ConstrainedProblem& problem, const HiddenConvexMeta& meta, const Vec& x0,
                   double eta0, double eps, double lambda,
                   std::optional<AdaLsParams> overrides = std::nullopt,
                   std::optional<std::int64_t> budget = std::nullopt, EtaState* state = nullptr);

struct LowerBoundInit {
  double eta0 = 0.0;
  std::optional<Vec> early_exit;
  Vec z;
  std::int64_t steps = 0;
};

// Projected gradient on F1 alone; either an eps-feasible shortcut or eta0 = F1(z) - eps.
LowerBoundInit init_lower_bound(const ConstrainedProblem& problem, const HiddenConvexMeta& meta,
                                const Vec& x0, double eps, std::int64_t max_steps = 0);

}  // namespace hc
