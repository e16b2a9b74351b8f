#include <doctest.h>

#include <cmath>
#include <random>

#include "hc/ippm.hpp"
#include "hc/problems.hpp"
#include "hc/subgrad.hpp"
#include "oracles.hpp"

using namespace hc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Oracle quadratic(Vec center, double scale = 1.0) {
  return Oracle{[center, scale](const Vec& x) { return scale * (x - center).squaredNorm(); },
                [center, scale](const Vec& x) {
                  return FirstOrder{scale * (x - center).squaredNorm(), Vec(2.0 * scale * (x - center))};
                }};
}

Oracle affine1d(double slope, double offset) {
  return Oracle{[=](const Vec& x) { return slope * x[0] + offset; },
                [=](const Vec& x) { return FirstOrder{slope * x[0] + offset, Vec::Constant(1, slope)}; }};
}

}  // namespace

TEST_CASE("one projected sub-gradient step on a quadratic") {
  auto r = projected_subgradient(quadratic(Vec::Zero(2)), BoxSet::unbounded(2), v2(1.0, 0.0), 1,
                                 [](std::int64_t) { return 0.25; });
  CHECK((r.best - v2(0.5, 0.0)).norm() == 0.0);
  CHECK(r.best_value == 0.25);
}

TEST_CASE("projected sub-gradient at the minimizer stays put") {
  Vec c = v2(0.3, -0.2);
  auto r = projected_subgradient(quadratic(c), BoxSet::uniform(2, -1, 1), c, 10, [](std::int64_t) { return 0.5; });
  CHECK((r.best - c).norm() == 0.0);
  CHECK(r.best_value == 0.0);
}

TEST_CASE("projected sub-gradient never returns worse than the start") {
  std::mt19937_64 rng(41);
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  for (int s = 0; s < 30; ++s) {
    Vec x0 = testing::uniform_point(rng, p.domain());
    auto r = projected_subgradient(p.f1_oracle(), p.domain(), x0, 50,
                                   [](std::int64_t t) { return 0.1 / std::sqrt(t + 1.0); });
    CHECK(r.best_value <= p.peek_f1(x0));
    CHECK(p.domain().contains(r.best));
  }
}

TEST_CASE("projected sub-gradient drives the CNLS constraint to tolerance") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  const double dx = p.domain().diameter(), g = inst.meta.g_bound;
  SubgradientOptions opt;
  opt.stop_below = 0.05;
  auto r = projected_subgradient(p.f2_oracle(), p.domain(), v2(2.4, -0.9), 5000,
                                 [=](std::int64_t t) { return dx / (g * std::sqrt(t + 1.0)); }, opt);
  CHECK(r.best_value <= 0.05);
  CHECK(r.steps_used < 5000);
  // The target level is attainable: the grid finds points with F2 <= 0.05.
  auto grid = grid_minimize([&](const Vec& x) { return p.peek_f2(x); }, [](const Vec&) { return -1.0; },
                            p.domain(), 1e-2, 0.0);
  CHECK(grid.f_best <= 0.05);
}

TEST_CASE("projected sub-gradient honours the budget") {
  auto inst = make_cgp2d();
  const auto& p = *inst.problem;
  OracleCounter& c = p.counter();
  BudgetScope scope(c, 7);
  const auto start = c.total();
  SubgradientOptions opt;
  opt.budget = &c;
  auto r = projected_subgradient(p.f1_oracle(), p.domain(), v2(1, 1), 100, [](std::int64_t) { return 1e-3; }, opt);
  CHECK(c.total() - start == 7);
  CHECK(r.steps_used == 6);
}

TEST_CASE("switching stepsize formula") {
  CHECK(swsg_stepsize(0, 2.0) == doctest::Approx(1.0 / 146.0).epsilon(1e-15));
  CHECK(swsg_stepsize(1, 1.0) == doctest::Approx(2.0 / 75.0).epsilon(1e-15));
  const double t = 1e8;
  CHECK(swsg_stepsize(static_cast<std::int64_t>(t), 3.0) * 3.0 * t == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS_AS(swsg_stepsize(-1, 1.0), Error);
  CHECK_THROWS_AS(swsg_stepsize(0, 0.0), Error);
}

TEST_CASE("switching with a slack constraint is weighted projected descent") {
  // phi2 = -10 everywhere: every step is an objective step.
  Oracle slack{[](const Vec&) { return -10.0; }, [](const Vec& x) { return FirstOrder{-10.0, Vec::Zero(x.size())}; }};
  Oracle obj = quadratic(v2(0.7, -0.4));
  BoxSet box = BoxSet::uniform(2, -0.5, 0.5);
  SwsgParams p;
  p.t_in = 40;
  p.tau = 0.1;
  p.alpha = 0.5;
  p.eps_in = 1e-3;
  p.mu_strong = 2.0;
  auto r = swsg(obj, slack, v2(0.0, 0.0), box, p);
  // Independent replay of the recursion.
  Vec z = v2(0.0, 0.0), acc = Vec::Zero(2);
  double w = 0.0;
  for (int t = 0; t < 40; ++t) {
    acc += (t + 1.0) * z;
    w += t + 1.0;
    z = (z - swsg_stepsize(t, 2.0) * 2.0 * (z - v2(0.7, -0.4))).cwiseMax(box.lower).cwiseMin(box.upper);
  }
  CHECK((r.point - acc / w).norm() <= 1e-15);
  CHECK(r.feasible);
  CHECK(r.averaged);
  CHECK(r.steps_used == 40);
}

TEST_CASE("switching on a 1D problem with a strictly feasible optimum") {
  // phi1 = x^2, phi2 = x - 1 on [-2, 2], tau = 0: the minimizer 0 is strictly feasible.
  SwsgParams p;
  p.t_in = 2000;
  p.tau = 0.0;
  p.alpha = 0.5;
  p.eps_in = 1e-4;
  p.mu_strong = 2.0;
  Oracle phi1{[](const Vec& x) { return x[0] * x[0]; },
              [](const Vec& x) { return FirstOrder{x[0] * x[0], Vec::Constant(1, 2.0 * x[0])}; }};
  auto r = swsg(phi1, affine1d(1.0, -1.0), Vec::Constant(1, 0.9), BoxSet::uniform(1, -2, 2), p);
  CHECK(std::abs(r.point[0]) < 2e-2);
  CHECK(r.feasible);
  CHECK(r.phi2_value <= 0.0);
}

TEST_CASE("switching without any objective step fails loudly") {
  Oracle bad{[](const Vec&) { return 5.0; }, [](const Vec& x) { return FirstOrder{5.0, Vec::Zero(x.size())}; }};
  SwsgParams p;
  p.t_in = 10;
  p.tau = 0.1;
  p.alpha = 0.1;
  p.eps_in = 1e-3;
  p.mu_strong = 1.0;
  CHECK_THROWS_AS(swsg(quadratic(Vec::Zero(2)), bad, v2(0, 0), BoxSet::uniform(2, -1, 1), p), Error);
}

TEST_CASE("switching output satisfies the feasibility contract on CNLS subproblems") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  std::mt19937_64 rng(43);
  const double tau = 0.05, rho_hat = 4.0;
  int checked = 0;
  for (int s = 0; s < 500 && checked < 20; ++s) {
    Vec xk = testing::uniform_point(rng, p.domain());
    if (p.peek_f2(xk) > tau) continue;
    auto sub = build_prox_subproblem(p, xk, rho_hat, tau);
    SwsgParams sp;
    sp.t_in = 3000;
    sp.tau = tau;
    sp.alpha = 0.1;
    sp.eps_in = sp.alpha * tau / 3.0;
    sp.mu_strong = rho_hat - inst.meta.rho;
    auto r = swsg(sub.phi1, sub.phi2, xk, p.domain(), sp);
    CHECK(r.feasible);
    CHECK(sub.phi2.value(r.point) <= tau);
    CHECK(p.domain().contains(r.point, 1e-12));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("switching is deterministic") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  auto sub = build_prox_subproblem(p, v2(0.5, 0.5), 4.0, 0.05);
  SwsgParams sp;
  sp.t_in = 500;
  sp.tau = 0.05;
  sp.alpha = 0.1;
  sp.eps_in = 1e-3;
  sp.mu_strong = 2.0;
  auto a = swsg(sub.phi1, sub.phi2, v2(0.5, 0.5), p.domain(), sp);
  auto b = swsg(sub.phi1, sub.phi2, v2(0.5, 0.5), p.domain(), sp);
  CHECK((a.point - b.point).norm() == 0.0);
  CHECK(a.phi2_value == b.phi2_value);
}

TEST_CASE("switching on the CNLS subproblem at (0.5, 0.5) matches a grid") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  const double tau = 0.05, rho_hat = 4.0, alpha = 0.1;
  Vec xk = v2(0.5, 0.5);
  auto sub = build_prox_subproblem(p, xk, rho_hat, tau);
  SwsgParams sp;
  sp.t_in = 20000;
  sp.tau = tau;
  sp.alpha = alpha;
  sp.eps_in = alpha / 3.0 * tau;
  sp.mu_strong = rho_hat - inst.meta.rho;
  auto r = swsg(sub.phi1, sub.phi2, xk, p.domain(), sp);
  // Optimum of phi1 over the shifted constraint phi2 <= tau - alpha tau / 3.
  auto g = testing::grid_prox_optimum(sub.phi1, sub.phi2, p.domain(), tau - alpha * tau / 3.0);
  CHECK(sub.phi2.value(r.point) <= tau);
  // The twice-refined grid is accurate to about 2e-5 * G.
  CHECK(sub.phi1.value(r.point) - g.f_best <= sp.eps_in + 1e-4);
}
