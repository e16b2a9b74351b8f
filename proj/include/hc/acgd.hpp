#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hc/core.hpp"
#include "hc/subgrad.hpp"

namespace hc {

struct AcgdSchedule {
  double kappa = 1.0;
  std::vector<double> theta;
  std::vector<double> eta;
  std::vector<double> tau;
  // log(omega_t); weights are normalized in log space to avoid overflow.
  std::vector<double> log_omega;

  // Constant strongly convex schedule for kappa = (L + rho_hat) / (rho_hat - rho):
  // theta = (s - 1)/(s + 1), tau = s - 1, eta = (L + rho_hat)/s, omega_t = (1 - 1/s)^{-t}
  // with s = sqrt(kappa).
  static AcgdSchedule strongly_convex(double l_smooth, double rho_hat, double mu_strong,
                                      std::int64_t t_in);
  // Schedule for merely convex subproblems: theta = (t-1)/t, tau = (t-1)/2,
  // eta = eta_scale L / t, omega_t = t.
  static AcgdSchedule convex(double l_smooth, std::int64_t t_in, double eta_scale = 2.0);
  // theta = tau = 0, omega = 1: a projected gradient step with a linearized constraint.
  static AcgdSchedule plain(double eta, std::int64_t t_in);
};

// ACGD on min phi1 s.t. phi2 + shift_b <= 0. Costs two oracle calls per
// iteration plus one for the final feasibility check of phi2 <= tau. If the
// weighted average fails that check, the best evaluated extrapolation point
// with phi2 <= tau is returned and `averaged` is false.
InnerResult acgd(const Oracle& phi1, const Oracle& phi2, const Vec& x_k, const BoxSet& set,
                 std::int64_t t_in, double shift_b, double tau, const AcgdSchedule& schedule,
                 double qp_tol = 0.0, const OracleCounter* budget = nullptr);

// Shift b of the constraint; the Slater branch uses beta = min{1, mu_c^2 theta/(rho_hat D_U^2)}.
double choose_shift(const HiddenConvexMeta& meta, double rho_hat, double tau, double eps,
                    std::optional<double> slater_theta);

}  // namespace hc
