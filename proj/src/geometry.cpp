#include "hc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hc/error.hpp"

namespace hc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDualCap = 1e12;

void check_dim(const BoxSet& set, const Vec& y) {
  if (set.lower.size() != y.size() || set.upper.size() != y.size())
    throw Error(ErrorCode::DimensionMismatch, "box has dim " + std::to_string(set.dim()) +
                                                  ", point has dim " + std::to_string(y.size()));
}

double clamp1(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Unit-normal halfspace <g, x> <= b with the original normal's length.
struct UnitCut {
  Vec g;
  double b;
  double scale;
};

// h(s) = <g, clamp(w - s g)> - b is piecewise linear and non-increasing in s.
double cut_value(const BoxSet& set, const Vec& w, const UnitCut& c, double s) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (c.g[j] == 0.0) continue;
    acc += c.g[j] * clamp1(w[j] - s * c.g[j], set.lower[j], set.upper[j]);
  }
  return acc - c.b;
}

// Smallest s >= 0 with h(s) <= 0, located exactly between breakpoints.
// Returns nullopt when h stays positive for every s (box ∩ cut empty).
std::optional<double> solve_single(const BoxSet& set, const Vec& w, const UnitCut& c) {
  double h0 = cut_value(set, w, c, 0.0);
  if (h0 <= 0.0) return 0.0;

  std::vector<double> knots;
  knots.reserve(2 * w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    double gj = c.g[j];
    if (gj == 0.0) continue;
    for (double bound : {set.lower[j], set.upper[j]}) {
      if (!std::isfinite(bound)) continue;
      double s = (w[j] - bound) / gj;
      if (s > 0.0) knots.push_back(s);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  // First knot where h <= 0, by bisection over the sorted knots.
  std::size_t lo = 0, hi = knots.size();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cut_value(set, w, c, knots[mid]) <= 0.0)
      hi = mid;
    else
      lo = mid + 1;
  }
  double sa = lo == 0 ? 0.0 : knots[lo - 1];
  double ha = lo == 0 ? h0 : cut_value(set, w, c, sa);
  if (lo < knots.size()) {
    double sb = knots[lo];
    double hb = cut_value(set, w, c, sb);
    if (ha == hb) return sb;
    return sa + ha * (sb - sa) / (ha - hb);
  }
  // Beyond the last knot only coordinates with infinite bounds still move.
  double slope = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    double gj = c.g[j];
    if (gj == 0.0) continue;
    double v = w[j] - (sa + 1.0) * gj;
    if (v > set.lower[j] && v < set.upper[j]) slope += gj * gj;
  }
  if (slope <= 0.0) return std::nullopt;
  return sa + ha / slope;
}

Vec primal(const BoxSet& set, const Vec& y, const std::vector<UnitCut>& cuts, const double* s) {
  Vec w = y;
  for (std::size_t i = 0; i < cuts.size(); ++i) w -= s[i] * cuts[i].g;
  return project_box(set, w);
}

}  // namespace

BoxSet BoxSet::uniform(int dim, double lo, double hi) {
  return BoxSet{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

BoxSet BoxSet::unbounded(int dim) { return uniform(dim, -kInf, kInf); }

bool BoxSet::contains(const Vec& x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x[j] < lower[j] - tol || x[j] > upper[j] + tol) return false;
  return true;
}

double BoxSet::diameter() const { return (upper - lower).norm(); }

Vec project_box(const BoxSet& set, const Vec& y) {
  check_dim(set, y);
  return y.cwiseMax(set.lower).cwiseMin(set.upper);
}

ProjectionResult project_box_halfspaces(const BoxSet& set, const Vec& y,
                                        const std::vector<Halfspace>& cons, double tol) {
  check_dim(set, y);
  if (cons.size() > 2) throw Error(ErrorCode::InvalidArgument, "at most two halfspaces");
  if (tol <= 0.0) tol = 1e-9 * (1.0 + y.norm());

  ProjectionResult out;
  std::vector<UnitCut> cuts;
  std::vector<int> origin;
  for (std::size_t i = 0; i < cons.size(); ++i) {
    if (cons[i].normal.size() != y.size())
      throw Error(ErrorCode::DimensionMismatch, "halfspace normal dimension");
    double n = cons[i].normal.norm();
    if (n == 0.0) {
      if (cons[i].offset < 0.0) {
        out.x = project_box(set, y);
        out.feasible = false;
        return out;
      }
      continue;
    }
    cuts.push_back(UnitCut{cons[i].normal / n, cons[i].offset / n, n});
    origin.push_back(static_cast<int>(i));
  }

  double s[2] = {0.0, 0.0};
  if (cuts.size() == 1) {
    auto r = solve_single(set, y, cuts[0]);
    if (!r) {
      out.x = project_box(set, y);
      out.feasible = false;
      return out;
    }
    s[0] = *r;
  } else if (cuts.size() == 2) {
    // Outer root on s2 of the reduced dual slope psi(s2) = <g2, x> - b2 with
    // s1 optimal for each s2; psi is non-increasing.
    auto inner = [&](double s2) { return solve_single(set, y - s2 * cuts[1].g, cuts[0]); };
    auto psi = [&](double s2, double& s1) {
      auto r = inner(s2);
      s1 = r ? *r : 0.0;
      double ss[2] = {s1, s2};
      return cuts[1].g.dot(primal(set, y, cuts, ss)) - cuts[1].b;
    };
    if (!inner(0.0)) {
      out.x = project_box(set, y);
      out.feasible = false;
      return out;
    }
    double s1 = 0.0;
    double p0 = psi(0.0, s1);
    if (p0 <= 0.0) {
      s[0] = s1;
    } else {
      double lo = 0.0, plo = p0, hi = 1.0, phi = psi(hi, s1);
      while (phi > tol) {
        if (hi > kDualCap) {
          out.x = primal(set, y, cuts, s);
          out.feasible = false;
          return out;
        }
        lo = hi;
        plo = phi;
        hi *= 2.0;
        phi = psi(hi, s1);
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        // Secant guess kept inside the bracket, falling back to bisection.
        double mid = lo + plo * (hi - lo) / (plo - phi);
        if (!(mid > lo && mid < hi) || it % 2 == 1) mid = 0.5 * (lo + hi);
        double pm = psi(mid, s1);
        if (pm > 0.0) {
          lo = mid;
          plo = pm;
        } else {
          hi = mid;
          phi = pm;
        }
        if (pm == 0.0) break;
      }
      s[1] = hi;
      psi(hi, s1);
      s[0] = s1;
    }
  }

  out.x = primal(set, y, cuts, s);
  for (std::size_t i = 0; i < cuts.size(); ++i)
    out.lambda[origin[i]] = 2.0 * s[i] / cuts[i].scale;

  for (std::size_t i = 0; i < cuts.size(); ++i)
    if (cuts[i].g.dot(out.x) - cuts[i].b > tol) out.feasible = false;
  return out;
}

ProjectionResult solve_acgd_qp(const Vec& pi, const Vec& z_prev, double eta_step, const Vec& nu,
                               const Vec& zbar, double c0, const BoxSet& set, double tol) {
  if (!(eta_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta_step must be positive");
  Vec center = z_prev - pi / eta_step;
  std::vector<Halfspace> cons{Halfspace{nu, nu.dot(zbar) - c0}};
  return project_box_halfspaces(set, center, cons, tol);
}

double projection_kkt_residual(const BoxSet& set, const Vec& y,
                               const std::vector<Halfspace>& cons, const ProjectionResult& r) {
  Vec w = y;
  for (std::size_t i = 0; i < cons.size(); ++i) w -= 0.5 * r.lambda[i] * cons[i].normal;
  double res = (project_box(set, w) - r.x).lpNorm<Eigen::Infinity>();
  for (std::size_t i = 0; i < cons.size(); ++i) {
    double slack = cons[i].normal.dot(r.x) - cons[i].offset;
    res = std::max(res, std::max(slack, 0.0));
    res = std::max(res, std::abs(r.lambda[i] * slack) / (1.0 + std::abs(cons[i].offset)));
    res = std::max(res, -r.lambda[i]);
  }
  return res;
}

}  // namespace hc
