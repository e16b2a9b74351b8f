#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace hc {

using Vec = Eigen::VectorXd;

// Componentwise box; entries of lower/upper may be infinite.
struct BoxSet {
  Vec lower;
  Vec upper;

  static BoxSet uniform(int dim, double lo, double hi);
  static BoxSet unbounded(int dim);

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& x, double tol = 0.0) const;
  // Largest finite distance between two points of the box; +inf if unbounded.
  double diameter() const;
};

// <normal, x> <= offset
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

Vec project_box(const BoxSet& set, const Vec& y);

struct ProjectionResult {
  Vec x;
  double lambda[2] = {0.0, 0.0};
  bool feasible = true;
};

// argmin ||x - y||^2 over set ∩ cons, cons.size() <= 2. feasible=false when
// the intersection is empty. tol <= 0 selects 1e-9 * (1 + ||y||).
ProjectionResult project_box_halfspaces(const BoxSet& set, const Vec& y,
                                        const std::vector<Halfspace>& cons,
                                        double tol = 0.0);

// argmin <pi, x> + eta/2 ||x - z_prev||^2 over set s.t. <nu, x - zbar> + c0 <= 0.
ProjectionResult solve_acgd_qp(const Vec& pi, const Vec& z_prev, double eta_step,
                               const Vec& nu, const Vec& zbar, double c0,
                               const BoxSet& set, double tol = 0.0);

// Worst KKT residual of a candidate returned by project_box_halfspaces; used by
// tests and by the solver's own self-check.
double projection_kkt_residual(const BoxSet& set, const Vec& y,
                               const std::vector<Halfspace>& cons,
                               const ProjectionResult& r);

}  // namespace hc
