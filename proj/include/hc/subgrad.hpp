#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "hc/core.hpp"

namespace hc {

struct InnerResult {
  Vec point;
  std::optional<double> phi1_gap_estimate;
  bool feasible = false;
  std::int64_t steps_used = 0;
  // phi2 at `point`, as evaluated by the solver's final check.
  double phi2_value = 0.0;
  // False when the weighted average failed the check and a fallback iterate
  // was returned instead.
  bool averaged = true;
};

using StepSchedule = std::function<double(std::int64_t t)>;

struct SubgradientOptions {
  std::optional<double> stop_below;  // stop once a value <= this is seen
  const OracleCounter* budget = nullptr;
};

struct SubgradientResult {
  Vec best;
  double best_value = 0.0;
  std::int64_t steps_used = 0;
};

// Best-value iterate of z_{t+1} = P(z_t - eta_t g_t); one oracle call per step.
SubgradientResult projected_subgradient(const Oracle& f, const BoxSet& set, const Vec& x0,
                                        std::int64_t steps, const StepSchedule& eta,
                                        const SubgradientOptions& opt = {});

// 2 / (mu (t + 2) + 144 mu / (t + 1)).
double swsg_stepsize(std::int64_t t, double mu_strong);

struct SwsgParams {
  std::int64_t t_in = 0;
  double tau = 0.0;
  double alpha = 0.0;
  double eps_in = 0.0;
  double mu_strong = 1.0;
  // Overrides swsg_stepsize when set.
  StepSchedule steps;
};

// Switching sub-gradient on min phi1 s.t. phi2 - tau + alpha tau / 3 <= 0.
// Throws EmptyFeasibleSet when no step was taken on phi1.
InnerResult swsg(const Oracle& phi1, const Oracle& phi2, const Vec& x_k, const BoxSet& set,
                 const SwsgParams& p, const OracleCounter* budget = nullptr);

}  // namespace hc
