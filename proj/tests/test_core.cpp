#include <doctest.h>

#include <cmath>
#include <random>

#include "hc/core.hpp"
#include "hc/problems.hpp"
#include "oracles.hpp"

using namespace hc;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("exact_penalty at the CGP-2D optimum is the objective") {
  auto inst = make_cgp2d();
  const auto& p = *inst.problem;
  const auto before = p.counter().value_calls();
  CHECK(exact_penalty(p, v2(2.0, 0.5), 1.0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(p.counter().value_calls() - before == 2);
}

TEST_CASE("exact_penalty with lambda zero drops the constraint") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  Vec x = v2(2.0, -0.5);
  CHECK(p.peek_f2(x) > 0.0);
  CHECK(exact_penalty(p, x, 0.0) == p.peek_f1(x));
  CHECK_THROWS_AS(exact_penalty(p, x, -1.0), Error);
}

TEST_CASE("exact_penalty ignores a slack constraint") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  Vec x = v2(0.5, 0.5);
  CHECK(p.peek_f2(x) == doctest::Approx(-0.7).epsilon(1e-14));
  CHECK(exact_penalty(p, x, 2.0) == p.peek_f1(x));
}

TEST_CASE("value function at the CGP-2D optimum is zero") {
  auto inst = make_cgp2d();
  CHECK(std::abs(value_function_v(*inst.problem, v2(2.0, 0.5), 5.0)) < 1e-14);
}

TEST_CASE("value function with a very low level is objective minus level") {
  auto inst = make_cgp2d();
  const auto& p = *inst.problem;
  Vec x = v2(1.0, 1.0);
  CHECK(value_function_v(p, x, -1e6) == p.peek_f1(x) + 1e6);
}

TEST_CASE("value function at the CNLS optimum equals the constraint value") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  Vec x = v2(0.85, 0.85);
  // u = (-0.15, -0.15): ||u - b2||_1 = 0.35 + 0.45, so F2 = 0 and v = max{0, 0}.
  CHECK(std::abs(p.peek_f2(x)) < 1e-14);
  CHECK(std::abs(value_function_v(p, x, 0.15)) < 1e-14);
}

TEST_CASE("oracle counter charges one call per query") {
  auto inst = make_cgp2d();
  const auto& p = *inst.problem;
  auto& c = p.counter();
  c.reset();
  Vec x = v2(1.0, 1.0);
  p.f1(x);
  p.f2_first_order(x);
  p.f1_first_order(x);
  CHECK(c.value_calls() == 1);
  CHECK(c.subgrad_calls() == 2);
  CHECK(c.total() == 3);
  p.peek_f1(x);
  p.peek_f2_first_order(x);
  CHECK(c.total() == 3);
}

TEST_CASE("budget scope caps and restores") {
  OracleCounter c;
  c.add_value();
  const auto saved = c.budget();
  {
    BudgetScope s(c, 5);
    CHECK(c.budget() == 6);
    CHECK(c.remaining() == 5);
    {
      BudgetScope inner(c, 100);
      CHECK(c.budget() == 6);
    }
    CHECK(c.budget() == 6);
  }
  CHECK(c.budget() == saved);
  {
    BudgetScope none(c, std::nullopt);
    CHECK(c.budget() == saved);
  }
}

TEST_CASE("trace keeps oracle_calls strictly increasing") {
  Trace t(2.0, 10);
  t.record_values(0, 1.0, 0.5, IterKind::Outer);
  t.record_values(3, 0.5, -1.0, IterKind::Inner, 0.25);
  t.record_values(3, 0.4, -1.0, IterKind::Inner);
  t.record_values(2, 0.1, 0.0, IterKind::Outer);
  REQUIRE(t.records().size() == 2);
  CHECK(t.records()[0].penalty == doctest::Approx(2.0));
  CHECK(t.records()[1].f1 == 0.4);
  CHECK(t.records()[1].penalty == 0.4);
  CHECK(t.offset() == 10);
}

TEST_CASE("meta validation rejects inverted bounds") {
  HiddenConvexMeta m;
  m.f1_lower = 2.0;
  m.f1_upper = 1.0;
  CHECK_THROWS_AS(m.validate(), Error);
  m.f1_upper = 3.0;
  CHECK_NOTHROW(m.validate());
  m.mu_c = 0.0;
  CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("hidden interpolation matches the map") {
  auto inst = make_cgp2d();
  Vec x = v2(0.5, 2.0), y = v2(2.0, 0.5);
  Vec xa = hidden_interpolate(*inst.map, x, y, 0.5);
  // log-map midpoint is the geometric mean.
  CHECK(xa[0] == doctest::Approx(1.0));
  CHECK(xa[1] == doctest::Approx(1.0));
  CHECK((hidden_interpolate(*inst.map, x, y, 0.0) - x).norm() < 1e-14);
  CHECK((hidden_interpolate(*inst.map, x, y, 1.0) - y).norm() < 1e-14);
}

TEST_CASE("hidden convexity sampling holds on every mapped problem") {
  RandomCgpSpec spec;
  spec.dim = 20;
  std::vector<ProblemInstance> insts{make_cnls(), make_cgp2d(), make_cosine_demo(),
                                     make_random_cgp(spec).instance};
  for (const auto& inst : insts) {
    CAPTURE(inst.problem->name());
    auto r = testing::sample_hidden_convexity(inst, 200, 7);
    CHECK(r.worst_fi <= 1e-9);
    CHECK(r.worst_ni <= 1e-9);
    CHECK(r.worst_roundtrip <= 1e-10);
  }
}

TEST_CASE("map lower bound mu_c holds on sampled pairs") {
  std::mt19937_64 rng(11);
  for (const auto& inst : {make_cnls(), make_cgp2d(), make_cosine_demo()}) {
    const auto& box = inst.problem->domain();
    for (int s = 0; s < 500; ++s) {
      Vec x = testing::uniform_point(rng, box), y = testing::uniform_point(rng, box);
      CHECK((inst.map->forward(x) - inst.map->forward(y)).norm() >=
            inst.meta.mu_c * (x - y).norm() - 1e-12);
    }
  }
}

TEST_CASE("sub-gradient norms respect G") {
  std::mt19937_64 rng(5);
  RandomCgpSpec spec;
  spec.dim = 30;
  for (const auto& inst : {make_cnls(), make_cgp2d(), make_cosine_demo(), make_random_cgp(spec).instance}) {
    CAPTURE(inst.problem->name());
    const auto& p = *inst.problem;
    double worst = 0.0;
    for (int s = 0; s < 300; ++s) {
      Vec x = testing::uniform_point(rng, p.domain());
      worst = std::max({worst, p.peek_f1_first_order(x).grad.norm(), p.peek_f2_first_order(x).grad.norm()});
    }
    CHECK(worst <= inst.meta.g_bound * (1.0 + 1e-12));
  }
}

TEST_CASE("gradients of smooth problems match central differences") {
  std::mt19937_64 rng(3);
  RandomCgpSpec spec;
  spec.dim = 10;
  for (const auto& inst : {make_cgp2d(), make_cosine_demo(), make_random_cgp(spec).instance}) {
    CAPTURE(inst.problem->name());
    const auto& p = *inst.problem;
    const BoxSet& box = p.domain();
    // Interior: stay 1% away from every face.
    BoxSet inner{box.lower + 0.01 * (box.upper - box.lower), box.upper - 0.01 * (box.upper - box.lower)};
    const double h = 1e-6;
    for (int s = 0; s < 50; ++s) {
      Vec x = testing::uniform_point(rng, inner);
      Vec dir = testing::uniform_point(rng, BoxSet::uniform(p.dim(), -1.0, 1.0)).normalized();
      for (int which = 0; which < 2; ++which) {
        auto val = [&](const Vec& z) { return which == 0 ? p.peek_f1(z) : p.peek_f2(z); };
        Vec g = which == 0 ? p.peek_f1_first_order(x).grad : p.peek_f2_first_order(x).grad;
        const double fd = (val(x + h * dir) - val(x - h * dir)) / (2.0 * h);
        const double an = g.dot(dir);
        CHECK(std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("first-order value agrees with the value oracle") {
  std::mt19937_64 rng(9);
  for (const auto& inst : {make_cnls(), make_cgp2d()}) {
    const auto& p = *inst.problem;
    for (int s = 0; s < 50; ++s) {
      Vec x = testing::uniform_point(rng, p.domain());
      CHECK(p.peek_f1_first_order(x).value == p.peek_f1(x));
      CHECK(p.peek_f2_first_order(x).value == p.peek_f2(x));
    }
  }
}

TEST_CASE("dimension mismatch is rejected by counted queries") {
  auto inst = make_cgp2d();
  CHECK_THROWS_AS(inst.problem->f1(Vec::Ones(3)), Error);
}
