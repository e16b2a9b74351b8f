#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hc/core.hpp"

namespace hc {

// Sum of b_k * prod_i x_i^{a_ik}; rows of `exponents` are the a_k.
struct Posynomial {
  std::vector<double> coef;
  Eigen::MatrixXd exponents;

  double value(const Vec& x) const;
  FirstOrder first_order(const Vec& x) const;
  // Same sum as a function of u = log x.
  double value_log(const Vec& u) const;
  Vec grad_log(const Vec& u) const;
};

// A benchmark instance: oracles plus whatever structure is known about it.
struct ProblemInstance {
  std::shared_ptr<ConstrainedProblem> problem;
  std::optional<HiddenMap> map;
  HiddenConvexMeta meta;
  Vec x0;
  std::optional<Vec> x_star;
  std::optional<double> f1_star;
  std::optional<double> lambda_star;
  // A point with F2 < 0 witnessing Slater's condition, when one is documented.
  std::optional<Vec> slater_point;
};

ProblemInstance make_cnls();
ProblemInstance make_cgp2d();

// 1 - cos(pi x) on [-0.95, 0.95] with a vacuous constraint.
ProblemInstance make_cosine_demo();

struct RandomCgpSpec {
  std::uint64_t seed = 42;
  int dim = 100;
  int k1 = 10;
  int k2 = 8;
  double exponent_lo = -0.5;
  double exponent_hi = 0.5;
  double box_lo = 0.5;
  double box_hi = 2.0;
  double lognormal_sigma = 0.5;
};

struct RandomCgp {
  ProblemInstance instance;
  Posynomial objective;
  Posynomial constraint;  // normalized so coefficients sum to 1; F2 = constraint - 1
};

RandomCgp make_random_cgp(const RandomCgpSpec& spec);

// splitmix64; the recurrence constants fix instances across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal from two uniforms (Box-Muller, cosine branch).
  double normal();

 private:
  std::uint64_t state_;
};

// max_i max{g_i(x), -g_i(x)}; sub-gradient from the lowest-index active branch,
// branch 2i is +g_i and 2i+1 is -g_i.
RawFunction equality_to_inequality(const std::vector<RawFunction>& components);

struct GridResult {
  Vec x_best;
  double f_best = 0.0;
};

// Exhaustive scan of a 1D/2D box; keeps points with g <= slack. `refine`
// zooms around the incumbent that many times, shrinking the step tenfold each
// time. Ties go to the lexicographically smallest grid index.
GridResult grid_minimize(const std::function<double(const Vec&)>& f,
                         const std::function<double(const Vec&)>& g, const BoxSet& box,
                         double resolution, double slack, int refine = 0);

GridResult grid_oracle(const ConstrainedProblem& problem, double resolution,
                       double constraint_slack, int refine = 0);

struct ReferenceResult {
  double f1_star_ref = 0.0;
  Vec u_star;
  Vec x_star;
  double lower_bound = 0.0;  // certified dual bound when available
  double f2_at_ref = 0.0;
};

// Solves min H1(u) s.t. H2(u) <= 0 over the u-box, where the problem is convex.
ReferenceResult reference_convex(const ProblemInstance& inst, double eps);

}  // namespace hc
