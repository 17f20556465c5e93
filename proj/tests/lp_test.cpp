#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "quantband/lp.hpp"
#include "test_support.hpp"

using namespace quantband::lp;

namespace {

// Worst primal constraint/bound violation of a claimed solution.
double primal_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j) {
    worst = std::max(worst, lp.var(j).lower - x[j]);
    worst = std::max(worst, x[j] - lp.var(j).upper);
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    double act = 0.0;
    for (auto& [j, a] : lp.row(i).terms) act += a * x[j];
    const auto& r = lp.row(i);
    if (r.rel != Relation::kGe) worst = std::max(worst, act - r.rhs);
    if (r.rel != Relation::kLe) worst = std::max(worst, r.rhs - act);
  }
  return worst;
}

}  // namespace

TEST_CASE("two variable inequality model") {
  // max 3x + 2y st x + y <= 4, x + 3y <= 6, x,y >= 0  ->  12 at (4, 0)
  LinearProgram lp;
  lp.set_sense(Sense::kMaximize);
  int x = lp.add_variable("x", 0.0, kInf);
  int y = lp.add_variable("y", 0.0, kInf);
  lp.set_objective(x, 3.0);
  lp.set_objective(y, 2.0);
  lp.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::kLe, 4.0);
  lp.add_constraint({{x, 1.0}, {y, 3.0}}, Relation::kLe, 6.0);
  auto s = solve_lp(lp);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(12.0));
  CHECK(s.x[0] == doctest::Approx(4.0));
  CHECK(s.x[1] == doctest::Approx(0.0));
  // Binding first row: shadow price of b1 for a max problem is 3.
  CHECK(s.duals[0] == doctest::Approx(3.0));
  CHECK(s.duals[1] == doctest::Approx(0.0));
}

TEST_CASE("equalities, ge rows and free variables") {
  // min x + 2y - z st x + y + z = 5, x - y >= 1, z <= 3, y >= 0, x free, z free
  LinearProgram lp;
  int x = lp.add_variable("x", -kInf, kInf);
  int y = lp.add_variable("y", 0.0, kInf);
  int z = lp.add_variable("z", -kInf, kInf);
  lp.set_objective(x, 1.0);
  lp.set_objective(y, 2.0);
  lp.set_objective(z, -1.0);
  lp.add_constraint({{x, 1.0}, {y, 1.0}, {z, 1.0}}, Relation::kEq, 5.0);
  lp.add_constraint({{x, 1.0}, {y, -1.0}}, Relation::kGe, 1.0);
  lp.add_constraint({{z, 1.0}}, Relation::kLe, 3.0);
  auto s = solve_lp(lp);
  REQUIRE(s.status == Status::kOptimal);
  // y = 0, z = 3 -> x = 2, objective 2 - 3 = -1.
  CHECK(s.objective == doctest::Approx(-1.0));
  CHECK(s.x[y] == doctest::Approx(0.0));
  CHECK(s.x[z] == doctest::Approx(3.0));
}

TEST_CASE("status detection") {
  SUBCASE("unbounded") {
    LinearProgram lp;
    int x = lp.add_variable("x", -kInf, kInf);
    lp.set_objective(x, 1.0);
    lp.add_constraint({{x, 1.0}}, Relation::kLe, 10.0);
    CHECK(solve_lp(lp).status == Status::kUnbounded);
  }
  SUBCASE("infeasible rows") {
    LinearProgram lp;
    int x = lp.add_variable("x", 0.0, kInf);
    lp.add_constraint({{x, 1.0}}, Relation::kGe, 3.0);
    lp.add_constraint({{x, 1.0}}, Relation::kLe, 2.0);
    CHECK(solve_lp(lp).status == Status::kInfeasible);
  }
  SUBCASE("empty bound interval") {
    LinearProgram lp;
    lp.add_variable("x", 1.0, 0.0);
    CHECK(solve_lp(lp).status == Status::kInfeasible);
  }
  SUBCASE("bounds only model") {
    LinearProgram lp;
    int x = lp.add_variable("x", -2.0, 5.0);
    lp.set_objective(x, -1.0);
    auto s = solve_lp(lp);
    REQUIRE(s.status == Status::kOptimal);
    CHECK(s.objective == doctest::Approx(-5.0));
  }
  SUBCASE("binaries rejected") {
    LinearProgram lp;
    lp.add_binary("z");
    CHECK_THROWS_AS(solve_lp(lp), std::invalid_argument);
  }
}

TEST_CASE("classic cycling-prone model terminates at the optimum") {
  // Beale's example; value -1/20 at x = (1/25, 0, 1, 0).
  LinearProgram lp;
  int x1 = lp.add_variable("x1", 0, kInf);
  int x2 = lp.add_variable("x2", 0, kInf);
  int x3 = lp.add_variable("x3", 0, kInf);
  int x4 = lp.add_variable("x4", 0, kInf);
  lp.set_objective(x1, -0.75);
  lp.set_objective(x2, 150.0);
  lp.set_objective(x3, -0.02);
  lp.set_objective(x4, 6.0);
  lp.add_constraint({{x1, 0.25}, {x2, -60.0}, {x3, -0.04}, {x4, 9.0}}, Relation::kLe, 0.0);
  lp.add_constraint({{x1, 0.5}, {x2, -90.0}, {x3, -0.02}, {x4, 3.0}}, Relation::kLe, 0.0);
  lp.add_constraint({{x3, 1.0}}, Relation::kLe, 1.0);
  auto s = solve_lp(lp);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(-0.05));
}

TEST_CASE("random boxed models match vertex enumeration") {
  std::mt19937_64 rng(424242);
  int solved = 0;
  for (int rep = 0; rep < 300; ++rep) {
    auto lp = testsupport::random_boxed_lp(rng);
    auto brute = testsupport::brute_force_lp(lp);
    auto s = solve_lp(lp);
    if (brute.feasible) {
      REQUIRE(s.status == Status::kOptimal);
      CHECK(std::abs(s.objective - brute.value) <= 1e-6 * (1 + std::abs(brute.value)));
      CHECK(primal_violation(lp, s.x) <= 1e-8);
      ++solved;
    } else {
      REQUIRE(s.status == Status::kInfeasible);
    }
  }
  CHECK(solved > 100);  // generator sanity: most instances are feasible
}

TEST_CASE("optimal solutions satisfy duality and complementary slackness") {
  std::mt19937_64 rng(777);
  for (int rep = 0; rep < 300; ++rep) {
    auto lp = testsupport::random_boxed_lp(rng);
    auto s = solve_lp(lp);
    if (s.status != Status::kOptimal) continue;
    const double scale = 1.0 + std::abs(s.objective);
    CHECK(std::abs(s.objective - s.dual_objective) <= 1e-7 * scale);
    for (int i = 0; i < lp.num_rows(); ++i) {
      double act = 0.0;
      for (auto& [j, a] : lp.row(i).terms) act += a * s.x[j];
      if (lp.row(i).rel != Relation::kEq)
        CHECK(std::abs(s.duals[i] * (act - lp.row(i).rhs)) <= 1e-7 * scale);
    }
    for (int j = 0; j < lp.num_vars(); ++j) {
      const auto& v = lp.var(j);
      const double rc = s.reduced_costs[j];
      // A nonzero reduced cost pins the variable to the matching bound.
      const double away = std::min(s.x[j] - v.lower, v.upper - s.x[j]);
      if (std::abs(rc) > 1e-7 * scale) CHECK(away * std::abs(rc) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("forced dualization matches the direct solve") {
  std::mt19937_64 rng(31337);
  SolveOptions dual_on;
  dual_on.dualize_min_rows = 1;
  dual_on.dualize_ratio = 0;
  SolveOptions dual_off;
  dual_off.allow_dualize = false;
  for (int rep = 0; rep < 200; ++rep) {
    auto lp = testsupport::random_boxed_lp(rng);
    if (lp.sense() != Sense::kMinimize || lp.num_rows() == 0) continue;
    auto a = solve_lp(lp, dual_on);
    auto b = solve_lp(lp, dual_off);
    REQUIRE(a.status == b.status);
    if (a.status != Status::kOptimal) continue;
    CHECK(std::abs(a.objective - b.objective) <= 1e-6 * (1 + std::abs(b.objective)));
    CHECK(primal_violation(lp, a.x) <= 1e-6);
  }
}

TEST_CASE("knapsack style mips match binary enumeration") {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<int> bd(1, 8);
  for (int rep = 0; rep < 60; ++rep) {
    auto lp = testsupport::random_boxed_lp(rng, 4, 5);
    // Promote a few variables to binaries.
    const int nb = std::min(lp.num_vars(), bd(rng));
    LinearProgram mip;
    mip.set_sense(lp.sense());
    for (int j = 0; j < lp.num_vars(); ++j) {
      if (j < nb) mip.add_binary(lp.var(j).name);
      else mip.add_variable(lp.var(j).name, lp.var(j).lower, lp.var(j).upper);
      mip.set_objective(j, lp.objective()[j]);
    }
    for (int i = 0; i < lp.num_rows(); ++i)
      mip.add_constraint(lp.row(i).terms, lp.row(i).rel, lp.row(i).rhs);
    auto brute = testsupport::brute_force_mip(mip);
    auto s = solve_mip(mip);
    if (brute.feasible) {
      REQUIRE(s.status == Status::kOptimal);
      CHECK(std::abs(s.objective - brute.value) <= 1e-6 * (1 + std::abs(brute.value)));
      for (int j = 0; j < nb; ++j)
        CHECK(std::abs(s.x[j] - std::round(s.x[j])) <= 1e-9);
    } else {
      CHECK(s.status == Status::kInfeasible);
    }
  }
}

TEST_CASE("mip on a pure knapsack") {
  // min mass subject to reaching a target: classic subset selection.
  LinearProgram lp;
  const std::vector<double> w{0.3, 0.25, 0.2, 0.15, 0.1};
  int o = lp.add_variable("o", 0.0, 1.0);
  lp.set_objective(o, 1.0);
  std::vector<std::pair<int, double>> mass{{o, 1.0}};
  std::vector<std::pair<int, double>> reach;
  for (std::size_t i = 0; i < w.size(); ++i) {
    int z = lp.add_binary("z" + std::to_string(i));
    mass.emplace_back(z, -w[i]);
    reach.emplace_back(z, w[i]);
  }
  lp.add_constraint(mass, Relation::kGe, 0.0);       // o >= sum z w
  lp.add_constraint(reach, Relation::kGe, 0.62);     // sum z w >= 0.62
  auto s = solve_mip(lp);
  REQUIRE(s.status == Status::kOptimal);
  CHECK(s.objective == doctest::Approx(0.65));  // 0.3 + 0.25 + 0.1
  CHECK(s.nodes >= 1);
}

TEST_CASE("model dump is algebraic text") {
  LinearProgram lp;
  int x = lp.add_variable("x", 0.0, 2.0);
  lp.set_objective(x, 1.5);
  lp.add_constraint({{x, 2.0}}, Relation::kLe, 3.0, "cap");
  std::ostringstream os;
  lp.dump(os);
  CHECK(os.str().find("min 1.5*x") != std::string::npos);
  CHECK(os.str().find("cap: 2*x <= 3") != std::string::npos);
}
