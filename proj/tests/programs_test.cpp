#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "quantband/distribution.hpp"
#include "quantband/model.hpp"
#include "quantband/programs.hpp"
#include "test_support.hpp"

using namespace quantband;

TEST_CASE("dual evaluation matches the slice average") {
  CHECK(std::abs(programs::expectation_via_dual({1, 2, 3, 4},
                                                {0.25, 0.25, 0.25, 0.25}, 0.5,
                                                1.0) -
                 3.5) <= 1e-9);
  CHECK(std::abs(programs::expectation_via_dual({1, 3}, {0.5, 0.5}, 0.5, 0.8) -
                 3.0) <= 1e-9);
  CHECK(std::abs(programs::expectation_via_dual({2.5, 2.5, 2.5},
                                                {0.2, 0.3, 0.5}, 0.1, 0.7) -
                 2.5) <= 1e-9);

  std::mt19937_64 rng(555);
  std::uniform_int_distribution<int> nd(1, 12);
  std::uniform_real_distribution<double> vd(-5.0, 5.0), ld(0.01, 0.99);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> t(n);
    for (double& v : t) v = vd(rng);
    double alpha = ld(rng), gamma = ld(rng);
    if (alpha > gamma) std::swap(alpha, gamma);
    if (gamma - alpha < 1e-3) gamma = std::min(1.0, alpha + 1e-3);
    if (rep % 7 == 0) gamma = 1.0;
    DiscreteDistribution d(t, p);
    CHECK(std::abs(programs::expectation_via_dual(t, p, alpha, gamma) -
                   d.expectation_slice(alpha, gamma)) <= 1e-7);
  }
}

TEST_CASE("tail average minimization") {
  auto fixed = testsupport::fixed_t_set({1, 2, 3, 4});
  auto s = programs::cvar_min(fixed, {0.25, 0.25, 0.25, 0.25}, 0.5);
  REQUIRE(s.status == lp::Status::kOptimal);
  CHECK(std::abs(s.objective - 3.5) <= 1e-9);

  auto fam = testsupport::affine_t_set({0.0, 1.0}, {1.0, -1.0});
  auto v = programs::cvar_min(fam, {0.5, 0.5}, 0.75);
  REQUIRE(v.status == lp::Status::kOptimal);
  CHECK(std::abs(v.objective - 0.5) <= 1e-9);

  // Level zero degenerates to minimizing the mean (here constant 0.5).
  auto mean = programs::cvar_min(fam, {0.5, 0.5}, 0.0);
  REQUIRE(mean.status == lp::Status::kOptimal);
  CHECK(std::abs(mean.objective - 0.5) <= 1e-9);

  CHECK_THROWS_AS(programs::cvar_min(fam, {0.5, 0.5}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("x-step with the zero start vector solves the upper tail problem") {
  std::mt19937_64 rng(616);
  std::uniform_real_distribution<double> vd(-2.0, 2.0), ld(0.1, 0.85);
  std::uniform_int_distribution<int> nd(2, 5);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> base(n), slope(n);
    for (int i = 0; i < n; ++i) {
      base[i] = vd(rng);
      slope[i] = vd(rng);
    }
    const double alpha = ld(rng);
    const double gamma = std::min(1.0, alpha + 0.1);
    auto fs = testsupport::affine_t_set(base, slope);
    BilinearProgram bp(fs, p, alpha, gamma);
    auto r = programs::find_xt(bp, std::vector<double>(n, 0.0));
    auto cv = programs::cvar_min(fs, p, alpha);
    REQUIRE(cv.status == lp::Status::kOptimal);
    CHECK(std::abs(r.value - cv.objective) <= 1e-7);
  }

  auto fam = testsupport::affine_t_set({0.0, 1.0}, {1.0, -1.0});
  BilinearProgram bp(fam, {0.5, 0.5}, 0.5, 0.75);
  auto r = programs::find_xt(bp, {0.0, 0.0});
  CHECK(std::abs(r.value - 0.5) <= 1e-9);
}

TEST_CASE("x-step on pinned losses matches the breakpoint oracle") {
  std::mt19937_64 rng(717);
  std::uniform_real_distribution<double> vd(-3.0, 3.0), ld(0.1, 0.9),
      wd(0.0, 1.0);
  std::uniform_int_distribution<int> nd(2, 6);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> t(n);
    for (double& v : t) v = vd(rng);
    double alpha = ld(rng), gamma = ld(rng);
    if (alpha > gamma) std::swap(alpha, gamma);
    if (gamma - alpha < 0.05) gamma = std::min(1.0, alpha + 0.05);

    // A feasible w': random box point rescaled onto the mass slice.
    std::vector<double> w(n);
    double mass = 0.0;
    for (int i = 0; i < n; ++i) mass += (w[i] = wd(rng)) * p[i];
    const double want_mass = 1.0 - gamma;
    bool ok = mass > 1e-12;
    if (ok) {
      double scale = want_mass / mass;
      for (double& v : w) {
        v *= scale;
        if (v > 1.0) ok = false;  // rescale overflowed the box; skip rep
      }
    }
    if (!ok) continue;

    BilinearProgram bp(testsupport::fixed_t_set(t), p, alpha, gamma);
    auto r = programs::find_xt(bp, w);
    CHECK(std::abs(r.value -
                   testsupport::fixed_w_value_oracle(t, p, alpha, gamma, w)) <=
          1e-7);
    for (int i = 0; i < n; ++i) CHECK(std::abs(r.t[i] - t[i]) <= 1e-8);
  }
}

TEST_CASE("x-step rejects infeasible tail vectors") {
  auto fs = testsupport::fixed_t_set({1.0, 3.0});
  BilinearProgram bp(fs, {0.5, 0.5}, 0.5, 0.8);
  CHECK_THROWS_AS(programs::find_xt(bp, {0.5, 0.5}),
                  std::invalid_argument);  // mass 0.5 != 0.2
  CHECK_THROWS_AS(programs::find_xt(bp, {1.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(programs::find_xt(bp, {0.1}), std::invalid_argument);
  CHECK_NOTHROW(programs::find_xt(bp, {0.0, 0.0}));
  CHECK_NOTHROW(programs::find_xt(bp, {0.4, 0.0}));  // 0.4*0.5 = 0.2
}

TEST_CASE("x-step dual masses dominate the optimal w'") {
  std::mt19937_64 rng(818);
  std::uniform_real_distribution<double> vd(-3.0, 3.0), ld(0.1, 0.9);
  std::uniform_int_distribution<int> nd(2, 6);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> t(n);
    for (double& v : t) v = vd(rng);
    double alpha = ld(rng), gamma = ld(rng);
    if (alpha > gamma) std::swap(alpha, gamma);
    if (gamma - alpha < 0.05) gamma = std::min(1.0, alpha + 0.05);

    BilinearProgram bp(testsupport::fixed_t_set(t), p, alpha, gamma);
    auto wbest = programs::find_w(bp, {}, t);
    auto r = programs::find_xt(bp, wbest.wprime);

    double wmass = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(r.w[i] >= -1e-8);
      CHECK(r.w[i] <= 1.0 + 1e-8);
      CHECK(r.w[i] >= wbest.wprime[i] - 1e-8);
      wmass += r.w[i] * p[i];
    }
    CHECK(std::abs(wmass - (1.0 - alpha)) <= 1e-6);
  }
}

TEST_CASE("w-step equals the dual evaluation of its loss vector") {
  auto fs = testsupport::fixed_t_set({1.0, 3.0});
  BilinearProgram bp(fs, {0.5, 0.5}, 0.5, 0.8);
  auto r = programs::find_w(bp, {}, {1.0, 3.0});
  CHECK(std::abs(r.value - 3.0) <= 1e-9);

  auto c3 = testsupport::fixed_t_set({2.5, 2.5, 2.5});
  BilinearProgram bpc(c3, {0.2, 0.3, 0.5}, 0.3, 0.9);
  CHECK(std::abs(programs::find_w(bpc, {}, {2.5, 2.5, 2.5}).value - 2.5) <=
        1e-9);

  auto f4 = testsupport::fixed_t_set({1, 2, 3, 4});
  BilinearProgram bp4(f4, {0.25, 0.25, 0.25, 0.25}, 0.25, 0.75);
  auto r4 = programs::find_w(bp4, {}, {1, 2, 3, 4});
  CHECK(std::abs(r4.value - 2.5) <= 1e-9);

  // Returned w' lies on the mass slice inside the unit box.
  double mass = 0.0;
  for (int i = 0; i < 4; ++i) {
    CHECK(r4.wprime[i] >= -1e-9);
    CHECK(r4.wprime[i] <= 1.0 + 1e-9);
    mass += 0.25 * r4.wprime[i];
  }
  CHECK(std::abs(mass - 0.25) <= 1e-9);

  CHECK_THROWS_AS(programs::find_w(bp, {}, {1.0, 3.5}), std::invalid_argument);
}

TEST_CASE("alternating pair of steps never increases the value") {
  std::mt19937_64 rng(919);
  std::uniform_real_distribution<double> vd(-2.0, 2.0), ld(0.1, 0.9);
  std::uniform_int_distribution<int> nd(2, 5);
  for (int rep = 0; rep < 15; ++rep) {
    const int n = nd(rng);
    auto p = testsupport::random_probs(rng, n);
    std::vector<double> base(n), slope(n);
    for (int i = 0; i < n; ++i) {
      base[i] = vd(rng);
      slope[i] = vd(rng);
    }
    double alpha = ld(rng), gamma = ld(rng);
    if (alpha > gamma) std::swap(alpha, gamma);
    if (gamma - alpha < 0.05) gamma = std::min(1.0, alpha + 0.05);
    BilinearProgram bp(testsupport::affine_t_set(base, slope), p, alpha, gamma);

    auto r1 = programs::find_xt(bp, std::vector<double>(n, 0.0));
    auto r2 = programs::find_w(bp, r1.x, r1.t);
    CHECK(r2.value <= r1.value + 1e-9);
    auto r3 = programs::find_xt(bp, r2.wprime);
    CHECK(r3.value <= r2.value + 1e-9);
  }
}
