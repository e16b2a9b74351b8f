#include "hc/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace hc {

namespace {

constexpr double kPi = std::numbers::pi;

double sgn0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

// ---------------------------------------------------------------- posynomial

double Posynomial::value(const Vec& x) const { return value_log(x.array().log().matrix()); }

FirstOrder Posynomial::first_order(const Vec& x) const {
  Vec u = x.array().log().matrix();
  FirstOrder out;
  out.value = 0.0;
  out.grad = Vec::Zero(x.size());
  for (std::size_t k = 0; k < coef.size(); ++k) {
    double m = coef[k] * std::exp(exponents.row(k).dot(u));
    out.value += m;
    out.grad += m * exponents.row(k).transpose();
  }
  out.grad = out.grad.cwiseQuotient(x);
  return out;
}

double Posynomial::value_log(const Vec& u) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < coef.size(); ++k) acc += coef[k] * std::exp(exponents.row(k).dot(u));
  return acc;
}

Vec Posynomial::grad_log(const Vec& u) const {
  Vec g = Vec::Zero(u.size());
  for (std::size_t k = 0; k < coef.size(); ++k)
    g += coef[k] * std::exp(exponents.row(k).dot(u)) * exponents.row(k).transpose();
  return g;
}

// ---------------------------------------------------------------- CNLS

namespace {

Vec cnls_forward(const Vec& x) { return vec2(x[0] - 1.0, 2.0 * std::abs(x[0]) - x[1] - 1.0); }

Vec cnls_inverse(const Vec& u) {
  double x1 = u[0] + 1.0;
  return vec2(x1, 2.0 * std::abs(x1) - 1.0 - u[1]);
}

// Generalized Jacobian transpose applied to a u-space vector; sgn(0) = 0.
Vec cnls_jt(const Vec& x, const Vec& gu) {
  double s = sgn0(x[0]);
  return vec2(gu[0] + 2.0 * s * gu[1], -gu[1]);
}

double cnls_h1(const Vec& u) { return std::max(std::abs(u[0]), std::abs(u[1])); }

Vec cnls_h1_grad(const Vec& u) {
  int i = std::abs(u[0]) >= std::abs(u[1]) ? 0 : 1;
  Vec g = Vec::Zero(2);
  g[i] = sgn0(u[i]);
  return g;
}

const double kCnlsB2[2] = {-0.5, -0.6};

double cnls_h2(const Vec& u) {
  return std::abs(u[0] - kCnlsB2[0]) + std::abs(u[1] - kCnlsB2[1]) - 0.8;
}

Vec cnls_h2_grad(const Vec& u) { return vec2(sgn0(u[0] - kCnlsB2[0]), sgn0(u[1] - kCnlsB2[1])); }

}  // namespace

ProblemInstance make_cnls() {
  RawFunction f1{[](const Vec& x) { return cnls_h1(cnls_forward(x)); },
                 [](const Vec& x) {
                   Vec u = cnls_forward(x);
                   return FirstOrder{cnls_h1(u), cnls_jt(x, cnls_h1_grad(u))};
                 }};
  RawFunction f2{[](const Vec& x) { return cnls_h2(cnls_forward(x)); },
                 [](const Vec& x) {
                   Vec u = cnls_forward(x);
                   return FirstOrder{cnls_h2(u), cnls_jt(x, cnls_h2_grad(u))};
                 }};
  BoxSet box = BoxSet::uniform(2, -1.0, 2.5);

  ProblemInstance inst;
  inst.problem = std::make_shared<ConstrainedProblem>("cnls", 2, f1, f2, box, false);
  // Bounding box of c(X); c(X) itself is not a box.
  BoxSet ubox{vec2(-2.0, -3.5), vec2(1.5, 5.0)};
  inst.map = HiddenMap{cnls_forward, cnls_inverse, cnls_h1, cnls_h2, cnls_h1_grad, cnls_h2_grad, ubox};

  // The Jacobian's smallest singular value is sqrt(2) - 1, so 1/4 is a valid
  // HC-2 modulus; sub-gradients are bounded by sqrt(10) through J^T.
  inst.meta.mu_c = 0.25;
  inst.meta.d_u = ubox.diameter();
  inst.meta.rho = 2.0;
  inst.meta.g_bound = std::sqrt(10.0);
  inst.meta.f1_lower = 0.0;
  inst.meta.f1_upper = 5.0;
  inst.meta.f2_lower = -0.8;
  inst.meta.theta_slater = 0.7;
  inst.x0 = vec2(0.5, 0.5);
  inst.x_star = vec2(0.85, 0.85);
  inst.f1_star = 0.15;
  inst.lambda_star = 0.5;
  inst.slater_point = vec2(0.5, 0.5);
  return inst;
}

// ---------------------------------------------------------------- CGP-2D

namespace {

double cgp2d_hessian_bound(const BoxSet& box, int n) {
  // F1 Hessian [[8/x1^3, 1], [1, 2/x2^3]]; F2 Hessian has norm 1.
  double best = 1.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      double x1 = box.lower[0] + (box.upper[0] - box.lower[0]) * i / n;
      double x2 = box.lower[1] + (box.upper[1] - box.lower[1]) * j / n;
      double a = 8.0 / (x1 * x1 * x1), d = 2.0 / (x2 * x2 * x2), b = 1.0;
      double mean = 0.5 * (a + d), rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
      best = std::max(best, std::max(std::abs(mean + rad), std::abs(mean - rad)));
    }
  }
  return best;
}

}  // namespace

ProblemInstance make_cgp2d() {
  auto f1v = [](const Vec& x) { return x[0] * x[1] + 4.0 / x[0] + 1.0 / x[1]; };
  auto f2v = [](const Vec& x) { return x[0] * x[1] - 1.0; };
  RawFunction f1{f1v, [f1v](const Vec& x) {
                   return FirstOrder{f1v(x), vec2(x[1] - 4.0 / (x[0] * x[0]), x[0] - 1.0 / (x[1] * x[1]))};
                 }};
  RawFunction f2{f2v, [f2v](const Vec& x) { return FirstOrder{f2v(x), vec2(x[1], x[0])}; }};
  BoxSet box = BoxSet::uniform(2, 0.4, 3.0);

  ProblemInstance inst;
  inst.problem = std::make_shared<ConstrainedProblem>("cgp2d", 2, f1, f2, box, true);
  auto fwd = [](const Vec& x) { return Vec(x.array().log().matrix()); };
  auto inv = [](const Vec& u) { return Vec(u.array().exp().matrix()); };
  auto h1 = [](const Vec& u) { return std::exp(u[0] + u[1]) + 4.0 * std::exp(-u[0]) + std::exp(-u[1]); };
  auto h2 = [](const Vec& u) { return std::exp(u[0] + u[1]) - 1.0; };
  auto h1g = [](const Vec& u) {
    double e = std::exp(u[0] + u[1]);
    return vec2(e - 4.0 * std::exp(-u[0]), e - std::exp(-u[1]));
  };
  auto h2g = [](const Vec& u) {
    double e = std::exp(u[0] + u[1]);
    return vec2(e, e);
  };
  BoxSet ubox = BoxSet::uniform(2, std::log(0.4), std::log(3.0));
  inst.map = HiddenMap{fwd, inv, h1, h2, h1g, h2g, ubox};

  inst.meta.mu_c = 1.0 / 3.0;
  inst.meta.d_u = ubox.diameter();
  inst.meta.rho = 1.0;
  inst.meta.g_bound = 25.286;
  inst.meta.l_smooth = cgp2d_hessian_bound(box, 400);
  inst.meta.f1_lower = 3.0 * std::cbrt(4.0);  // unconstrained minimum at x1^3 = 16
  inst.meta.f1_upper = f1v(vec2(0.4, 0.4));
  inst.meta.f2_lower = 0.4 * 0.4 - 1.0;
  inst.meta.theta_slater = 0.75;
  inst.x0 = vec2(0.5, 0.5);
  inst.x_star = vec2(2.0, 0.5);
  inst.f1_star = 5.0;
  inst.slater_point = vec2(0.5, 0.5);
  return inst;
}

// ---------------------------------------------------------------- cosine demo

ProblemInstance make_cosine_demo() {
  auto f1v = [](const Vec& x) { return 1.0 - std::cos(kPi * x[0]); };
  RawFunction f1{f1v, [f1v](const Vec& x) {
                   Vec g(1);
                   g[0] = kPi * std::sin(kPi * x[0]);
                   return FirstOrder{f1v(x), g};
                 }};
  RawFunction f2{[](const Vec&) { return 0.0; },
                 [](const Vec& x) { return FirstOrder{0.0, Vec::Zero(x.size())}; }};
  BoxSet box = BoxSet::uniform(1, -0.95, 0.95);

  ProblemInstance inst;
  inst.problem = std::make_shared<ConstrainedProblem>("cosine", 1, f1, f2, box, true);
  auto fwd = [](const Vec& x) { return Vec(x.unaryExpr([](double v) { return std::sin(0.5 * kPi * v); })); };
  auto inv = [](const Vec& u) { return Vec(u.unaryExpr([](double v) { return 2.0 / kPi * std::asin(v); })); };
  auto h1 = [](const Vec& u) { return 2.0 * u.squaredNorm(); };
  auto h1g = [](const Vec& u) { return Vec(4.0 * u); };
  auto h2 = [](const Vec&) { return 0.0; };
  auto h2g = [](const Vec& u) { return Vec(Vec::Zero(u.size())); };
  double ub = std::sin(0.5 * kPi * 0.95);
  inst.map = HiddenMap{fwd, inv, h1, h2, h1g, h2g, BoxSet::uniform(1, -ub, ub)};

  inst.meta.mu_c = 0.5 * kPi * std::cos(0.5 * kPi * 0.95);
  inst.meta.d_u = 2.0 * ub;
  inst.meta.rho = kPi * kPi;
  inst.meta.g_bound = kPi;
  inst.meta.l_smooth = kPi * kPi;
  inst.meta.f1_lower = 0.0;
  inst.meta.f1_upper = 2.0;
  inst.meta.f2_lower = 0.0;
  Vec x0(1);
  x0[0] = 0.891;
  inst.x0 = x0;
  inst.x_star = Vec::Zero(1);
  inst.f1_star = 0.0;
  return inst;
}

// ---------------------------------------------------------------- random CGP

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

RandomCgp make_random_cgp(const RandomCgpSpec& spec) {
  if (spec.dim <= 0 || spec.k1 <= 0 || spec.k2 <= 0)
    throw Error(ErrorCode::InvalidArgument, "random CGP sizes must be positive");
  SplitMix64 rng(spec.seed);
  auto draw = [&](int k) {
    Posynomial p;
    p.exponents.resize(k, spec.dim);
    for (int r = 0; r < k; ++r)
      for (int i = 0; i < spec.dim; ++i)
        p.exponents(r, i) = spec.exponent_lo + (spec.exponent_hi - spec.exponent_lo) * rng.uniform();
    p.coef.resize(k);
    for (int r = 0; r < k; ++r) p.coef[r] = std::exp(spec.lognormal_sigma * rng.normal());
    return p;
  };
  RandomCgp out;
  out.objective = draw(spec.k1);
  out.constraint = draw(spec.k2);
  double total = 0.0;
  for (double b : out.constraint.coef) total += b;
  for (double& b : out.constraint.coef) b /= total;

  auto obj = std::make_shared<Posynomial>(out.objective);
  auto con = std::make_shared<Posynomial>(out.constraint);
  RawFunction f1{[obj](const Vec& x) { return obj->value(x); },
                 [obj](const Vec& x) { return obj->first_order(x); }};
  RawFunction f2{[con](const Vec& x) { return con->value(x) - 1.0; },
                 [con](const Vec& x) {
                   FirstOrder r = con->first_order(x);
                   r.value -= 1.0;
                   return r;
                 }};
  BoxSet box = BoxSet::uniform(spec.dim, spec.box_lo, spec.box_hi);

  ProblemInstance& inst = out.instance;
  inst.problem = std::make_shared<ConstrainedProblem>("cgp-rand", spec.dim, f1, f2, box, true);
  BoxSet ubox = BoxSet::uniform(spec.dim, std::log(spec.box_lo), std::log(spec.box_hi));
  inst.map = HiddenMap{[](const Vec& x) { return Vec(x.array().log().matrix()); },
                       [](const Vec& u) { return Vec(u.array().exp().matrix()); },
                       [obj](const Vec& u) { return obj->value_log(u); },
                       [con](const Vec& u) { return con->value_log(u) - 1.0; },
                       [obj](const Vec& u) { return obj->grad_log(u); },
                       [con](const Vec& u) { return con->grad_log(u); },
                       ubox};

  // Crude but valid bounds from max_x x^a = r^{sum |a_i|}, r = max(hi, 1/lo).
  double r = std::max(spec.box_hi, 1.0 / spec.box_lo);
  auto bounds = [&](const Posynomial& p, double& lo, double& hi, double& curv, double& grad) {
    lo = hi = curv = grad = 0.0;
    for (std::size_t k = 0; k < p.coef.size(); ++k) {
      double l1 = p.exponents.row(k).lpNorm<1>();
      double l2 = p.exponents.row(k).norm();
      double linf = p.exponents.row(k).lpNorm<Eigen::Infinity>();
      double top = p.coef[k] * std::pow(r, l1);
      lo += p.coef[k] * std::pow(r, -l1);
      hi += top;
      curv += top * (l2 * l2 + linf) / (spec.box_lo * spec.box_lo);
      grad += top * l2 / spec.box_lo;
    }
  };
  double lo1, hi1, c1, g1, lo2, hi2, c2, g2;
  bounds(out.objective, lo1, hi1, c1, g1);
  bounds(out.constraint, lo2, hi2, c2, g2);
  inst.meta.mu_c = 1.0 / spec.box_hi;
  inst.meta.d_u = ubox.diameter();
  inst.meta.l_smooth = std::max(c1, c2);
  inst.meta.rho = std::max(c1, c2);
  inst.meta.g_bound = std::max(g1, g2);
  inst.meta.f1_lower = lo1;
  inst.meta.f1_upper = hi1;
  inst.meta.f2_lower = lo2 - 1.0;
  inst.x0 = Vec::Ones(spec.dim);
  return out;
}

// ---------------------------------------------------------------- equality

RawFunction equality_to_inequality(const std::vector<RawFunction>& components) {
  if (components.empty()) throw Error(ErrorCode::InvalidArgument, "no equality components");
  auto comps = std::make_shared<std::vector<RawFunction>>(components);
  auto value = [comps](const Vec& x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : *comps) {
      double v = c.value(x);
      best = std::max(best, std::max(v, -v));
    }
    return best;
  };
  auto first_order = [comps](const Vec& x) {
    FirstOrder best{-std::numeric_limits<double>::infinity(), Vec()};
    for (const auto& c : *comps) {
      FirstOrder r = c.first_order(x);
      if (r.value > best.value) best = FirstOrder{r.value, r.grad};
      if (-r.value > best.value) best = FirstOrder{-r.value, -r.grad};
    }
    return best;
  };
  return RawFunction{value, first_order};
}

// ---------------------------------------------------------------- grid oracle

GridResult grid_minimize(const std::function<double(const Vec&)>& f,
                         const std::function<double(const Vec&)>& g, const BoxSet& box,
                         double resolution, double slack, int refine) {
  const int dim = box.dim();
  if (dim < 1 || dim > 2) throw Error(ErrorCode::InvalidArgument, "grid search needs dim <= 2");
  if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  for (int j = 0; j < dim; ++j)
    if (!std::isfinite(box.lower[j]) || !std::isfinite(box.upper[j]))
      throw Error(ErrorCode::InvalidArgument, "grid search needs a bounded box");

  BoxSet window = box;
  double res = resolution;
  GridResult best;
  bool found = false;
  for (int level = 0; level <= refine; ++level) {
    std::array<long, 2> n{0, 0};
    for (int j = 0; j < dim; ++j)
      n[j] = static_cast<long>(std::floor((window.upper[j] - window.lower[j]) / res + 1e-9)) + 1;
    Vec x(dim);
    auto coord = [&](int j, long i) {
      return i + 1 == n[j] ? window.upper[j] : window.lower[j] + static_cast<double>(i) * res;
    };
    bool level_found = false;
    GridResult lbest;
    for (long i = 0; i < n[0]; ++i) {
      x[0] = coord(0, i);
      for (long k = 0; k < (dim == 2 ? n[1] : 1); ++k) {
        if (dim == 2) x[1] = coord(1, k);
        if (g(x) > slack) continue;
        double v = f(x);
        if (!level_found || v < lbest.f_best) {
          lbest = GridResult{x, v};
          level_found = true;
        }
      }
    }
    if (level_found && (!found || lbest.f_best <= best.f_best)) {
      best = lbest;
      found = true;
    }
    if (!found) throw Error(ErrorCode::NoFeasibleGridPoint, "no grid point satisfies the constraint");
    for (int j = 0; j < dim; ++j) {
      window.lower[j] = std::max(box.lower[j], best.x_best[j] - 2.0 * res);
      window.upper[j] = std::min(box.upper[j], best.x_best[j] + 2.0 * res);
    }
    res /= 10.0;
  }
  return best;
}

GridResult grid_oracle(const ConstrainedProblem& problem, double resolution, double constraint_slack,
                       int refine) {
  return grid_minimize([&](const Vec& x) { return problem.peek_f1(x); },
                       [&](const Vec& x) { return problem.peek_f2(x); }, problem.domain(), resolution,
                       constraint_slack, refine);
}

// ---------------------------------------------------------------- reference

namespace {

// Projected accelerated gradient with backtracking and function-value restart
// for min_{u in box} phi(u); returns the final gradient-mapping norm.
double fista_box(const std::function<double(const Vec&)>& phi, const std::function<Vec(const Vec&)>& grad,
                 const BoxSet& box, Vec& u, int max_iter, double tol) {
  double lip = 1.0;
  Vec y = u, u_prev = u;
  double t = 1.0;
  double fu = phi(u);
  double gm = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    Vec gy = grad(y);
    double fy = phi(y);
    Vec next;
    for (;;) {
      next = project_box(box, y - gy / lip);
      Vec d = next - y;
      if (phi(next) <= fy + gy.dot(d) + 0.5 * lip * d.squaredNorm() + 1e-15 * std::abs(fy)) break;
      lip *= 2.0;
    }
    gm = lip * (next - y).norm();
    double fn = phi(next);
    if (fn > fu) {
      // Restart momentum from the incumbent.
      y = u;
      t = 1.0;
      continue;
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - u);
    u_prev = u;
    u = next;
    fu = fn;
    t = t_next;
    lip *= 0.9;
    if (gm <= tol) break;
  }
  return gm;
}

ReferenceResult reference_smooth(const HiddenMap& m, double eps, double d_u) {
  const BoxSet& ub = m.u_box;
  Vec u = 0.5 * (ub.lower + ub.upper);
  auto solve = [&](double lam, Vec& uu) {
    auto phi = [&](const Vec& v) { return m.h1_value(v) + lam * m.h2_value(v); };
    auto grad = [&](const Vec& v) { return Vec(m.h1_subgrad(v) + lam * m.h2_subgrad(v)); };
    return fista_box(phi, grad, ub, uu, 200000, 1e-11);
  };

  ReferenceResult out;
  Vec u0 = u;
  solve(0.0, u0);
  if (m.h2_value(u0) <= 0.0) {
    out.u_star = u0;
    out.f1_star_ref = m.h1_value(u0);
    out.lower_bound = out.f1_star_ref;
    out.f2_at_ref = m.h2_value(u0);
    out.x_star = m.inverse(u0);
    return out;
  }
  double lo = 0.0, hi = 1.0;
  Vec uhi = u0;
  for (;;) {
    solve(hi, uhi);
    if (m.h2_value(uhi) <= 0.0) break;
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw Error(ErrorCode::Infeasible, "reference: constraint appears infeasible");
  }
  Vec ulo = u0;
  double best_lower = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    double mid = 0.5 * (lo + hi);
    Vec um = uhi;
    double gm = solve(mid, um);
    double lag = m.h1_value(um) + mid * m.h2_value(um);
    best_lower = std::max(best_lower, lag - gm * d_u);
    if (m.h2_value(um) > 0.0) {
      lo = mid;
      ulo = um;
    } else {
      hi = mid;
      uhi = um;
    }
    if (m.h1_value(uhi) - best_lower <= 0.01 * eps) break;
  }
  out.u_star = uhi;
  out.f1_star_ref = m.h1_value(uhi);
  out.lower_bound = best_lower;
  out.f2_at_ref = m.h2_value(uhi);
  out.x_star = m.inverse(uhi);
  return out;
}

// Switching sub-gradient in u-space for the non-smooth convex case.
ReferenceResult reference_nonsmooth(const HiddenMap& m, double eps, double d_u, double g_bound) {
  const BoxSet& ub = m.u_box;
  Vec u = 0.5 * (ub.lower + ub.upper);
  const long steps = 2000000;
  Vec avg = Vec::Zero(u.size());
  double wsum = 0.0;
  Vec best_u = u;
  double best_f = std::numeric_limits<double>::infinity();
  for (long t = 0; t < steps; ++t) {
    double eta = d_u / (g_bound * std::sqrt(static_cast<double>(t) + 1.0));
    Vec g;
    double c = m.h2_value(u);
    if (c <= 0.25 * eps) {
      double f = m.h1_value(u);
      if (c <= 0.0 && f < best_f) {
        best_f = f;
        best_u = u;
      }
      double w = static_cast<double>(t) + 1.0;
      avg += w * u;
      wsum += w;
      g = m.h1_subgrad(u);
    } else {
      g = m.h2_subgrad(u);
    }
    u = project_box(ub, u - eta * g);
  }
  ReferenceResult out;
  if (wsum > 0.0) {
    Vec a = avg / wsum;
    if (m.h2_value(a) <= 0.0 && m.h1_value(a) < best_f) {
      best_f = m.h1_value(a);
      best_u = a;
    }
  }
  out.u_star = best_u;
  out.f1_star_ref = best_f;
  out.lower_bound = -std::numeric_limits<double>::infinity();
  out.f2_at_ref = m.h2_value(best_u);
  out.x_star = m.inverse(best_u);
  return out;
}

}  // namespace

ReferenceResult reference_convex(const ProblemInstance& inst, double eps) {
  if (!inst.map) throw Error(ErrorCode::InvalidArgument, "reference needs a hidden map");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  if (inst.problem->smooth()) return reference_smooth(*inst.map, eps, inst.meta.d_u);
  return reference_nonsmooth(*inst.map, eps, inst.meta.d_u, inst.meta.g_bound);
}

}  // namespace hc
