#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "quantband/distribution.hpp"
#include "quantband/model.hpp"
#include "test_support.hpp"

using namespace quantband;

namespace {

BilinearProgram fixed_bp(const std::vector<double>& t,
                         const std::vector<double>& p, double alpha,
                         double gamma) {
  return BilinearProgram(testsupport::fixed_t_set(t), p, alpha, gamma);
}

}  // namespace

TEST_CASE("objective arithmetic at a supplied point") {
  auto bp = fixed_bp({1.0, 3.0}, {0.5, 0.5}, 0.5, 0.8);
  BilinearPoint psi;
  psi.x = {};
  psi.t = {1.0, 3.0};
  psi.s = 3.0;
  psi.theta = {0.0, 0.0};
  psi.wprime = {0.0, 0.4};
  CHECK(std::abs(evaluate_objective(bp, psi) - 3.0) <= 1e-12);

  BilinearPoint zero;
  zero.x = {};
  zero.t = {1.0, 3.0};
  zero.s = 0.0;
  zero.theta = {0.0, 0.0};
  zero.wprime = {0.0, 0.0};
  CHECK(evaluate_objective(bp, zero) == 0.0);

  // Affine in (s, theta): equal forward differences when both are doubled.
  BilinearPoint twice = psi;
  twice.s *= 2.0;
  BilinearPoint base = psi;
  base.s = 0.0;
  const double d1 = evaluate_objective(bp, twice) - evaluate_objective(bp, psi);
  const double d2 = evaluate_objective(bp, psi) - evaluate_objective(bp, base);
  CHECK(std::abs(d1 - d2) <= 1e-12);

  BilinearPoint bad = psi;
  bad.theta = {0.0};
  CHECK_THROWS_AS(evaluate_objective(bp, bad), std::invalid_argument);
}

TEST_CASE("construction rejects bad input") {
  // x <= -1 and -x <= 0 cannot hold together.
  std::vector<std::vector<double>> a{{1.0}, {-1.0}};
  std::vector<std::vector<double>> b{{0.0}, {0.0}};
  CHECK_THROWS_AS(FeasibleSet(a, b, {-1.0, 0.0}), std::invalid_argument);

  CHECK_THROWS_AS(FeasibleSet({{1.0}}, {{1.0, 0.0}, {0.0, 1.0}}, {1.0}),
                  std::invalid_argument);

  auto fs = testsupport::fixed_t_set({1.0, 2.0});
  CHECK_THROWS_AS(BilinearProgram(fs, {0.5, 0.5}, 0.8, 0.8),
                  std::invalid_argument);
  CHECK_THROWS_AS(BilinearProgram(fs, {0.5, 0.6}, 0.2, 0.8),
                  std::invalid_argument);
  CHECK_THROWS_AS(BilinearProgram(fs, {0.5, 0.5, 0.0}, 0.2, 0.8),
                  std::invalid_argument);
}

TEST_CASE("exact optimum on pinned losses equals the slice average") {
  CHECK(std::abs(solve_exact_small(fixed_bp({1.0, 3.0}, {0.5, 0.5}, 0.5, 0.8)) -
                 3.0) <= 1e-9);

  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<int> nd(1, 6);
  std::uniform_real_distribution<double> vd(-3.0, 3.0), ld(0.02, 0.98);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> t(n);
    for (double& v : t) v = vd(rng);
    double alpha = ld(rng), gamma = ld(rng);
    if (alpha > gamma) std::swap(alpha, gamma);
    if (alpha == gamma) gamma = std::min(1.0, gamma + 0.01);
    if (rep % 5 == 0) gamma = 1.0;
    DiscreteDistribution d(t, p);
    const double want = d.expectation_slice(alpha, gamma);
    const double got = solve_exact_small(fixed_bp(t, p, alpha, gamma));
    CHECK(std::abs(got - want) <= 1e-7);
  }
}

TEST_CASE("exact optimum on a one-dimensional family") {
  auto fs = testsupport::affine_t_set({0.0, 1.0}, {1.0, -1.0});
  BilinearProgram bp(fs, {0.5, 0.5}, 0.5, 0.8);
  CHECK(std::abs(solve_exact_small(bp) - 0.5) <= 1e-9);

  // Grid reference: the optimum over x of the slice average of (base+slope*x).
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> vd(-2.0, 2.0), ld(0.05, 0.95);
  std::uniform_int_distribution<int> nd(2, 5);
  for (int rep = 0; rep < 12; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> base(n), slope(n);
    double maxslope = 0.0;
    for (int i = 0; i < n; ++i) {
      base[i] = vd(rng);
      slope[i] = vd(rng);
      maxslope = std::max(maxslope, std::abs(slope[i]));
    }
    double alpha = ld(rng), gamma = ld(rng);
    if (alpha > gamma) std::swap(alpha, gamma);
    if (gamma - alpha < 0.05) gamma = std::min(1.0, alpha + 0.05);
    BilinearProgram rbp(testsupport::affine_t_set(base, slope), p, alpha, gamma);
    const double got = solve_exact_small(rbp);

    const int grid = 2000;
    double ref = testsupport::kInf;
    for (int g = 0; g <= grid; ++g) {
      const double x = static_cast<double>(g) / grid;
      std::vector<double> t(n);
      for (int i = 0; i < n; ++i) t[i] = base[i] + slope[i] * x;
      ref = std::min(ref, DiscreteDistribution(t, p).expectation_slice(alpha, gamma));
    }
    CHECK(got <= ref + 1e-7);
    CHECK(ref - got <= maxslope / grid + 1e-7);
  }
}

TEST_CASE("exact optimum grows with the upper level") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> vd(-2.0, 2.0), ld(0.05, 0.9);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = 3;
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> base(n), slope(n);
    for (int i = 0; i < n; ++i) {
      base[i] = vd(rng);
      slope[i] = vd(rng);
    }
    const double alpha = 0.25 * ld(rng);
    double g1 = ld(rng), g2 = ld(rng);
    if (g1 > g2) std::swap(g1, g2);
    g1 = std::max(g1, alpha + 0.02);
    g2 = std::max(g2, g1 + 0.02);
    auto fs = testsupport::affine_t_set(base, slope);
    const double v1 = solve_exact_small(BilinearProgram(fs, p, alpha, g1));
    const double v2 = solve_exact_small(BilinearProgram(fs, p, alpha, g2));
    CHECK(v1 <= v2 + 1e-9);
  }
}

TEST_CASE("quantile integer program on pinned and family instances") {
  auto fixed = testsupport::fixed_t_set({0.1, 0.4});
  auto exact = var_ip(fixed, {0.6, 0.4}, 0.7, 1.0, false);
  REQUIRE(exact.status == lp::Status::kOptimal);
  CHECK(std::abs(exact.objective - 0.4) <= 1e-9);

  auto relax = var_ip(fixed, {0.6, 0.4}, 0.7, 1.0, true);
  REQUIRE(relax.status == lp::Status::kOptimal);
  CHECK(std::abs(relax.objective - 0.1) <= 1e-9);

  auto fam = testsupport::affine_t_set({0.0, 1.0}, {1.0, -1.0});
  auto v = var_ip(fam, {0.5, 0.5}, 0.75, 1.0, false);
  REQUIRE(v.status == lp::Status::kOptimal);
  CHECK(std::abs(v.objective - 0.5) <= 1e-9);
}

TEST_CASE("quantile integer program properties") {
  std::mt19937_64 rng(9090);
  std::uniform_real_distribution<double> vd(-1.5, 1.5), ld(0.2, 0.95);
  std::uniform_int_distribution<int> nd(2, 5);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> base(n), slope(n);
    for (int i = 0; i < n; ++i) {
      base[i] = vd(rng);
      slope[i] = vd(rng);
    }
    const double gamma = ld(rng);
    auto fs = testsupport::affine_t_set(base, slope);

    auto model = build_var_ip(fs, p, gamma, std::nullopt, false);
    auto ip = lp::solve_mip(model.lp);
    REQUIRE(ip.status == lp::Status::kOptimal);
    auto lpx = var_ip(fs, p, gamma, std::nullopt, true);
    REQUIRE(lpx.status == lp::Status::kOptimal);
    CHECK(lpx.objective <= ip.objective + 1e-9);

    // The optimal level is the gamma-quantile of its own loss vector.
    std::vector<double> tstar(ip.x.begin() + model.t0,
                              ip.x.begin() + model.t0 + n);
    DiscreteDistribution d(tstar, p);
    CHECK(std::abs(d.quantile(gamma) - ip.objective) <= 1e-7);

    // A generously larger big-M cannot change the integer optimum.
    auto wide = var_ip(fs, p, gamma, 50.0, false);
    REQUIRE(wide.status == lp::Status::kOptimal);
    CHECK(std::abs(wide.objective - ip.objective) <= 1e-7);
  }
}
