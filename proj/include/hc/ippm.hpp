#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "hc/acgd.hpp"
#include "hc/core.hpp"
#include "hc/subgrad.hpp"

namespace hc {

enum class InnerKind { SwSG, ACGD, SM };

const char* inner_kind_name(InnerKind k);

struct IppmConfig {
  double rho_hat = 0.0;
  double tau = 0.0;
  double eps = 0.0;
  double eps_in = 0.0;
  std::int64_t n_outer = 0;
  std::int64_t t_inner = 0;
  double alpha = 0.0;
  InnerKind inner_kind = InnerKind::SwSG;
  // ACGD constraint shift b; the constraint handed to ACGD is phi2 + b <= 0.
  double shift_b = 0.0;
  // Strong convexity modulus of the subproblems, rho_hat - rho by default.
  double mu_strong = 0.0;
  // Smoothness constant L of F1/F2; ACGD works with L + rho_hat.
  double l_smooth = 0.0;
  // mu_strong <= 0 selects the convex ACGD schedule with eta_t = scale (L + rho_hat) / t.
  double acgd_eta_scale = 2.0;
  // SwSG stepsize c / (t + 1) instead of the strongly convex schedule when set.
  std::optional<double> swsg_step_scale;
  double qp_tol = 0.0;
  // Hard cap on counted oracle calls for the whole run.
  std::optional<std::int64_t> budget;
  std::map<std::string, double> derived;  // logged schedule quantities
  std::vector<std::string> warnings;
};

struct ProxSubproblem {
  Vec center;
  Oracle phi1;
  Oracle phi2;  // pre-shift: F2 + rho_hat/2 ||x - center||^2
  double tau = 0.0;
  double rho_hat = 0.0;
};

ProxSubproblem build_prox_subproblem(const ConstrainedProblem& problem, const Vec& x_k,
                                     double rho_hat, double tau);

// Inexact proximal point loop; returns the last outer iterate.
SolveReport ippm_run(const ConstrainedProblem& problem, const HiddenConvexMeta& meta,
                     const Vec& x0, const IppmConfig& cfg);

// Runs a single inner solve as ippm_run would for one outer step.
InnerResult ippm_inner_step(const ConstrainedProblem& problem, const ProxSubproblem& sub,
                            const IppmConfig& cfg);

IppmConfig schedule_nonsmooth(const HiddenConvexMeta& meta, const BoxSet& domain, double eps,
                              double tau);
IppmConfig schedule_smooth(const HiddenConvexMeta& meta, const BoxSet& domain, double eps,
                           double tau);
IppmConfig schedule_smooth_slater(const HiddenConvexMeta& meta, const BoxSet& domain, double eps,
                                  double tau);
IppmConfig schedule_hsc(const HiddenConvexMeta& meta, const BoxSet& domain, double eps, double tau);

// Outer iteration count of the main theorem, with Delta0 = f1_upper - f1_lower.
std::int64_t outer_iterations(const HiddenConvexMeta& meta, double eps, double tau);

struct FeasibleStart {
  Vec x;
  std::int64_t steps = 0;
};

// Sub-gradient descent on F2 until F2 <= tau.
FeasibleStart init_feasible(const ConstrainedProblem& problem, const HiddenConvexMeta& meta,
                            const Vec& x_any, double tau, std::int64_t max_steps = 100000);

}  // namespace hc
