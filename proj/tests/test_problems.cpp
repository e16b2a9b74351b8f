#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

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

TEST_CASE("CNLS reference points") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  CHECK(p.peek_f2(v2(0.5, 0.5)) == doctest::Approx(-0.7).epsilon(1e-14));
  CHECK(p.peek_f1(v2(0.85, 0.85)) == doctest::Approx(0.15).epsilon(1e-14));
  Vec u = inst.map->forward(v2(0.85, 0.85));
  CHECK(u[0] == doctest::Approx(-0.15));
  CHECK(u[1] == doctest::Approx(-0.15));
  CHECK_FALSE(p.smooth());
  CHECK(p.domain().lower[0] == -1.0);
  CHECK(p.domain().upper[1] == 2.5);
}

TEST_CASE("CNLS sub-gradient uses sgn(0) = 0 and the lowest active index") {
  auto inst = make_cnls();
  const auto& p = *inst.problem;
  // x1 = 0: u = (-1, -x2 - 1); at x2 = 0, |u0| = |u1| = 1 so index 0 wins.
  Vec g = p.peek_f1_first_order(v2(0.0, 0.0)).grad;
  // d|u0|/dx = sgn(u0) * (1, 0) = (-1, 0)
  CHECK(g[0] == -1.0);
  CHECK(g[1] == 0.0);
  // F2 = |u0 + 0.5| + |u1 + 0.6| - 0.8 with u1 = 2|x1| - x2 - 1; at x1 = 0 the
  // 2 sgn(x1) entry of the Jacobian vanishes.
  Vec g2 = p.peek_f2_first_order(v2(0.0, 1.0)).grad;
  // u = (-1, -2): sgn(u0 + 0.5) = -1, sgn(u1 + 0.6) = -1
  CHECK(g2[0] == -1.0);
  CHECK(g2[1] == 1.0);
}

TEST_CASE("CGP-2D reference points") {
  auto inst = make_cgp2d();
  const auto& p = *inst.problem;
  CHECK(p.peek_f1(v2(2.0, 0.5)) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(std::abs(p.peek_f2(v2(2.0, 0.5))) < 1e-15);
  CHECK(p.peek_f2(v2(0.5, 0.5)) == doctest::Approx(-0.75).epsilon(1e-15));
  Vec u = inst.map->forward(v2(2.0, 0.5));
  CHECK(u[0] == doctest::Approx(std::log(2.0)));
  CHECK(u[1] == doctest::Approx(-std::log(2.0)));
  CHECK(p.smooth());
  REQUIRE(inst.meta.l_smooth.has_value());
}

TEST_CASE("CGP-2D smoothness constant bounds sampled Hessians") {
  // Independent check: finite-difference Hessians at random box points.
  auto inst = make_cgp2d();
  const auto& p = *inst.problem;
  std::mt19937_64 rng(31);
  const double h = 1e-5;
  double worst = 0.0;
  for (int s = 0; s < 400; ++s) {
    Vec x = testing::uniform_point(rng, p.domain());
    Eigen::Matrix2d hs;
    for (int j = 0; j < 2; ++j) {
      Vec e = Vec::Zero(2);
      e[j] = h;
      Vec col = (p.peek_f1_first_order(x + e).grad - p.peek_f1_first_order(x - e).grad) / (2 * h);
      hs.col(j) = col;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (hs + hs.transpose()));
    worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  CHECK(worst <= *inst.meta.l_smooth * (1.0 + 1e-3));
  CHECK(worst >= 0.5 * *inst.meta.l_smooth);
}

TEST_CASE("splitmix64 reproduces the reference stream") {
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFULL);
  CHECK(g.next() == 0x6E789E6AA1B965F4ULL);
  SplitMix64 a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  SplitMix64 c(7);
  double lo = 1.0, hi = 0.0, mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = c.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    mean += c.normal() / 20000.0;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("random CGP constraint is tight at the all-ones point") {
  for (std::uint64_t seed : {1ULL, 2ULL, 42ULL, 12345ULL}) {
    RandomCgpSpec spec;
    spec.seed = seed;
    auto r = make_random_cgp(spec);
    CHECK(std::abs(r.instance.problem->peek_f2(Vec::Ones(spec.dim))) < 1e-14);
    double sum = 0.0;
    for (double b : r.constraint.coef) {
      CHECK(b > 0.0);
      sum += b;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (double b : r.objective.coef) CHECK(b > 0.0);
    CHECK(r.objective.exponents.cwiseAbs().maxCoeff() <= 0.5);
    CHECK(r.objective.exponents.rows() == spec.k1);
    CHECK(r.constraint.exponents.rows() == spec.k2);
  }
}

TEST_CASE("random CGP is reproducible from its seed") {
  RandomCgpSpec spec;
  spec.seed = 17;
  auto a = make_random_cgp(spec), b = make_random_cgp(spec);
  CHECK(a.objective.coef == b.objective.coef);
  CHECK(a.constraint.coef == b.constraint.coef);
  CHECK((a.objective.exponents - b.objective.exponents).cwiseAbs().maxCoeff() == 0.0);
  spec.seed = 18;
  auto c = make_random_cgp(spec);
  CHECK(a.objective.coef != c.objective.coef);
}

TEST_CASE("seed-42 instance matches the frozen fixture") {
  std::ifstream in(std::string(HC_TEST_FIXTURES) + "/cgp_rand_seed42.json");
  REQUIRE(in.good());
  auto j = nlohmann::json::parse(in);
  RandomCgpSpec spec;
  spec.seed = j["seed"].get<std::uint64_t>();
  spec.dim = j["dim"].get<int>();
  spec.k1 = j["k1"].get<int>();
  spec.k2 = j["k2"].get<int>();
  auto r = make_random_cgp(spec);
  CHECK(r.instance.problem->peek_f1(Vec::Ones(spec.dim)) == doctest::Approx(j["f1_at_x0"].get<double>()).epsilon(1e-6));
  CHECK(j["f1_star_ref"].get<double>() < j["f1_at_x0"].get<double>());
}

TEST_CASE("posynomial with a zero exponent row is constant") {
  Posynomial p;
  p.coef = {2.5};
  p.exponents = Eigen::MatrixXd::Zero(1, 3);
  std::mt19937_64 rng(1);
  for (int s = 0; s < 20; ++s) {
    Vec x = testing::uniform_point(rng, BoxSet::uniform(3, 0.5, 2.0));
    CHECK(p.value(x) == 2.5);
    CHECK(p.first_order(x).grad.norm() == 0.0);
  }
}

TEST_CASE("posynomial gradient matches the analytic formula and differences") {
  Posynomial p;
  p.coef = {1.5, 0.25};
  p.exponents.resize(2, 2);
  p.exponents << 1.0, -0.5, 0.3, 2.0;
  Vec x = v2(1.3, 0.7);
  // d/dx1: 1.5 x2^-0.5 + 0.25 * 0.3 x1^-0.7 x2^2
  const double g0 = 1.5 * std::pow(0.7, -0.5) + 0.25 * 0.3 * std::pow(1.3, -0.7) * 0.49;
  const double g1 = 1.5 * 1.3 * -0.5 * std::pow(0.7, -1.5) + 0.25 * std::pow(1.3, 0.3) * 2.0 * 0.7;
  FirstOrder fo = p.first_order(x);
  CHECK(fo.grad[0] == doctest::Approx(g0).epsilon(1e-14));
  CHECK(fo.grad[1] == doctest::Approx(g1).epsilon(1e-14));
  CHECK(fo.value == p.value(x));

  RandomCgpSpec spec;
  spec.dim = 8;
  auto r = make_random_cgp(spec);
  std::mt19937_64 rng(2);
  for (int s = 0; s < 30; ++s) {
    Vec z = testing::uniform_point(rng, BoxSet::uniform(8, 0.6, 1.9));
    Vec g = r.objective.first_order(z).grad;
    for (int i = 0; i < 8; ++i) {
      Vec e = Vec::Zero(8);
      e[i] = 1e-6;
      const double fd = (r.objective.value(z + e) - r.objective.value(z - e)) / 2e-6;
      CHECK(std::abs(fd - g[i]) <= 1e-5 * std::max(1.0, std::abs(g[i])));
    }
    Vec u = z.array().log().matrix();
    CHECK(r.objective.value_log(u) == doctest::Approx(r.objective.value(z)).epsilon(1e-12));
    // Chain rule: d/du_i = x_i d/dx_i
    CHECK((r.objective.grad_log(u) - z.cwiseProduct(g)).norm() <= 1e-10 * (1.0 + g.norm()));
  }
}

TEST_CASE("equality_to_inequality takes the max of both signs") {
  RawFunction zero{[](const Vec&) { return 0.0; },
                   [](const Vec& x) { return FirstOrder{0.0, Vec::Zero(x.size())}; }};
  auto single = equality_to_inequality({zero});
  CHECK(single.value(v2(3.0, -1.0)) == 0.0);

  RawFunction c1{[](const Vec& x) { return x[0] - 1.0; },
                 [](const Vec& x) { return FirstOrder{x[0] - 1.0, v2(1.0, 0.0)}; }};
  RawFunction c2{[](const Vec& x) { return x[1]; }, [](const Vec& x) { return FirstOrder{x[1], v2(0.0, 1.0)}; }};
  auto both = equality_to_inequality({c1, c2});
  CHECK(both.value(v2(1.0, 0.0)) == 0.0);
  // branches at (2, -3): {1, -1, -3, 3}; the max is branch 3 (-g2).
  FirstOrder fo = both.first_order(v2(2.0, -3.0));
  CHECK(fo.value == 3.0);
  CHECK((fo.grad - v2(0.0, -1.0)).norm() == 0.0);
  // At (1, 0) all branches tie at 0; branch 0 (+g1) is the lowest index.
  CHECK((both.first_order(v2(1.0, 0.0)).grad - v2(1.0, 0.0)).norm() == 0.0);
  CHECK_THROWS_AS(equality_to_inequality({}), Error);
}

TEST_CASE("grid oracle recovers the known optima") {
  auto cnls = make_cnls();
  auto g = grid_oracle(*cnls.problem, 1e-3, 0.0);
  CHECK(std::abs(g.f_best - 0.15) <= 2.0 * 1e-3 * cnls.meta.g_bound);
  CHECK(cnls.problem->peek_f2(g.x_best) <= 0.0);

  auto cgp = make_cgp2d();
  auto h = grid_oracle(*cgp.problem, 1e-3, 0.0);
  CHECK(std::abs(h.f_best - 5.0) <= 1e-3 * cgp.meta.g_bound);
  CHECK(cgp.problem->peek_f2(h.x_best) <= 0.0);
}

TEST_CASE("grid oracle refines monotonically up to the resolution band") {
  for (const auto& inst : {make_cnls(), make_cgp2d()}) {
    for (double res : {0.02, 0.01, 0.005}) {
      auto coarse = grid_oracle(*inst.problem, res, 0.0);
      auto fine = grid_oracle(*inst.problem, res / 2.0, 0.0);
      CHECK(fine.f_best <= coarse.f_best + res * inst.meta.g_bound);
    }
  }
}

TEST_CASE("grid oracle without feasible points fails") {
  RawFunction one{[](const Vec&) { return 1.0; }, [](const Vec& x) { return FirstOrder{1.0, Vec::Zero(x.size())}; }};
  ConstrainedProblem stub("stub", 2, one, one, BoxSet::uniform(2, 0.0, 1.0), true);
  CHECK_THROWS_AS(grid_oracle(stub, 0.1, 0.0), Error);
  ConstrainedProblem big("big", 3, one, one, BoxSet::uniform(3, 0.0, 1.0), true);
  CHECK_THROWS_AS(grid_oracle(big, 0.1, 2.0), Error);
}

TEST_CASE("convex reference recovers the known optima") {
  auto cgp = make_cgp2d();
  auto r = reference_convex(cgp, 1e-4);
  CHECK(std::abs(r.f1_star_ref - 5.0) <= 1e-4);
  CHECK(r.lower_bound <= 5.0 + 1e-9);
  CHECK((r.x_star - v2(2.0, 0.5)).norm() <= 1e-2);

  auto cnls = make_cnls();
  auto s = reference_convex(cnls, 1e-3);
  CHECK(std::abs(s.f1_star_ref - 0.15) <= 1e-3);
  CHECK(cnls.problem->peek_f2(s.x_star) <= 1e-3);
}

TEST_CASE("convex reference agrees with grid search on 2D random instances") {
  for (std::uint64_t seed : {3ULL, 4ULL, 5ULL}) {
    RandomCgpSpec spec;
    spec.seed = seed;
    spec.dim = 2;
    spec.k1 = 4;
    spec.k2 = 3;
    auto r = make_random_cgp(spec);
    auto ref = reference_convex(r.instance, 1e-6);
    auto grid = grid_oracle(*r.instance.problem, 1e-3, 0.0, 2);
    CAPTURE(seed);
    CHECK(ref.f1_star_ref <= grid.f_best + 1e-6);
    CHECK(grid.f_best - ref.f1_star_ref <= 1e-4);
    CHECK(ref.lower_bound <= ref.f1_star_ref + 1e-12);
  }
}
