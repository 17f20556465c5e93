#include "quantband/rlt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quantband::rlt {

namespace {

constexpr double kInfV = std::numeric_limits<double>::infinity();

std::string tag2(const char* stem, int i, int j) {
  return std::string(stem) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

RltModel build_impl(const BilinearProgram& bp, bool improved) {
  RltModel m(bp);
  const auto& fs = m.src.set();
  const auto& p = m.src.probs();
  const int n = fs.num_scenarios();
  const int k = fs.dim_x();
  const int l = fs.num_rows();
  const double g1 = 1.0 - m.src.gamma();  // mass above the band
  const double scale = 1.0 / m.src.width();
  m.n = n;
  m.k = k;
  m.l = l;
  m.improved = improved;
  auto& g = m.lp;

  m.off = fs.append_to(g);  // x, T columns plus the l set rows
  m.s_col = g.add_variable("s", -kInfV, kInfV);
  m.theta0 = g.num_vars();
  for (int i = 0; i < n; ++i)
    g.add_variable("theta_" + std::to_string(i), 0.0, kInfV);
  m.w0 = g.num_vars();
  for (int j = 0; j < n; ++j)
    g.add_variable("wprime_" + std::to_string(j), 0.0, 1.0);
  m.tw0 = g.num_vars();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.add_variable(tag2("Tw", i, j), -kInfV, kInfV);
  m.xw0 = g.num_vars();
  for (int r = 0; r < k; ++r)
    for (int j = 0; j < n; ++j) g.add_variable(tag2("xw", r, j), -kInfV, kInfV);
  m.thw0 = g.num_vars();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g.add_variable(tag2("thw", i, j), 0.0, kInfV);
  m.sw0 = g.num_vars();
  for (int i = 0; i < n; ++i)
    g.add_variable("sw_" + std::to_string(i), -kInfV, kInfV);
  m.census.lifted_vars = g.num_vars() - m.tw0;
  m.census.lifted_bounds = n * n;

  g.set_objective(m.s_col, (1.0 - m.src.alpha()) * scale);
  for (int i = 0; i < n; ++i) {
    g.set_objective(m.theta0 + i, scale);
    g.set_objective(m.tw(i, i), -p[i] * scale);
  }

  m.tail_row0 = g.num_rows();
  for (int i = 0; i < n; ++i) {
    if (!improved) {
      g.add_constraint(
          {{m.theta0 + i, 1.0}, {m.s_col, p[i]}, {m.off.t0 + i, -p[i]}},
          lp::Relation::kGe, 0.0, "tail_" + std::to_string(i));
    } else {
      g.add_constraint(
          {{m.theta0 + i, 1.0}, {m.sw(i), p[i]}, {m.tw(i, i), -p[i]}},
          lp::Relation::kEq, 0.0, "tail_diag_" + std::to_string(i));
      g.add_constraint({{m.s_col, 1.0},
                        {m.sw(i), -1.0},
                        {m.off.t0 + i, -1.0},
                        {m.tw(i, i), 1.0}},
                       lp::Relation::kGe, 0.0, "tail_gap_" + std::to_string(i));
    }
  }
  m.mass_row = g.num_rows();
  {
    std::vector<std::pair<int, double>> mass;
    for (int j = 0; j < n; ++j) mass.emplace_back(m.w0 + j, p[j]);
    g.add_constraint(std::move(mass), lp::Relation::kEq, g1, "band_mass");
  }
  m.census.base_rows = g.num_rows();

  // Family 1: tail row i times the w'_j factors.
  m.f1_lo0 = g.num_rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.add_constraint(
          {{m.thw(i, j), 1.0}, {m.sw(j), p[i]}, {m.tw(i, j), -p[i]}},
          lp::Relation::kGe, 0.0, tag2("tail_w_lo", i, j));
  m.f1_hi0 = g.num_rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.add_constraint({{m.theta0 + i, 1.0},
                        {m.s_col, p[i]},
                        {m.off.t0 + i, -p[i]},
                        {m.thw(i, j), -1.0},
                        {m.sw(j), -p[i]},
                        {m.tw(i, j), p[i]}},
                       lp::Relation::kGe, 0.0, tag2("tail_w_hi", i, j));
  m.f1_mass0 = g.num_rows();
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> t;
    for (int j = 0; j < n; ++j) {
      t.emplace_back(m.thw(i, j), p[j]);
      t.emplace_back(m.sw(j), p[i] * p[j]);
      t.emplace_back(m.tw(i, j), -p[i] * p[j]);
    }
    t.emplace_back(m.theta0 + i, -g1);
    t.emplace_back(m.s_col, -g1 * p[i]);
    t.emplace_back(m.off.t0 + i, g1 * p[i]);
    g.add_constraint(std::move(t), lp::Relation::kEq, 0.0,
                     "tail_w_mass_" + std::to_string(i));
  }
  m.census.family1_rows = g.num_rows() - m.f1_lo0;

  // Family 2: theta_i >= 0 times the w'_j factors (the "lo" product is the
  // thw_i_j >= 0 bound, already on the column).
  m.f2_hi0 = g.num_rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g.add_constraint({{m.theta0 + i, 1.0}, {m.thw(i, j), -1.0}},
                       improved && i == j ? lp::Relation::kEq
                                          : lp::Relation::kGe,
                       0.0, tag2("slack_w_hi", i, j));
  m.f2_mass0 = g.num_rows();
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, double>> t;
    for (int j = 0; j < n; ++j) t.emplace_back(m.thw(i, j), p[j]);
    t.emplace_back(m.theta0 + i, -g1);
    g.add_constraint(std::move(t), lp::Relation::kEq, 0.0,
                     "slack_w_mass_" + std::to_string(i));
  }
  m.census.family2_rows = g.num_rows() - m.f2_hi0;

  // Family 3: set row r times the w'_j factors.
  const auto& a = fs.a();
  const auto& b = fs.b();
  const auto& c = fs.c();
  m.f3_lo0 = g.num_rows();
  for (int r = 0; r < l; ++r)
    for (int j = 0; j < n; ++j) {
      std::vector<std::pair<int, double>> t;
      for (int q = 0; q < k; ++q)
        if (a[r][q] != 0.0) t.emplace_back(m.xw(q, j), a[r][q]);
      for (int i = 0; i < n; ++i)
        if (b[r][i] != 0.0) t.emplace_back(m.tw(i, j), b[r][i]);
      if (c[r] != 0.0) t.emplace_back(m.w0 + j, -c[r]);
      g.add_constraint(std::move(t), lp::Relation::kLe, 0.0,
                       tag2("set_w_lo", r, j));
    }
  m.f3_hi0 = g.num_rows();
  for (int r = 0; r < l; ++r)
    for (int j = 0; j < n; ++j) {
      std::vector<std::pair<int, double>> t;
      for (int q = 0; q < k; ++q)
        if (a[r][q] != 0.0) {
          t.emplace_back(m.off.x0 + q, a[r][q]);
          t.emplace_back(m.xw(q, j), -a[r][q]);
        }
      for (int i = 0; i < n; ++i)
        if (b[r][i] != 0.0) {
          t.emplace_back(m.off.t0 + i, b[r][i]);
          t.emplace_back(m.tw(i, j), -b[r][i]);
        }
      if (c[r] != 0.0) t.emplace_back(m.w0 + j, c[r]);
      g.add_constraint(std::move(t), lp::Relation::kLe, c[r],
                       tag2("set_w_hi", r, j));
    }
  m.f3_mass0 = g.num_rows();
  for (int r = 0; r < l; ++r) {
    std::vector<std::pair<int, double>> t;
    for (int q = 0; q < k; ++q)
      if (a[r][q] != 0.0) {
        for (int j = 0; j < n; ++j) t.emplace_back(m.xw(q, j), a[r][q] * p[j]);
        t.emplace_back(m.off.x0 + q, -g1 * a[r][q]);
      }
    for (int i = 0; i < n; ++i)
      if (b[r][i] != 0.0) {
        for (int j = 0; j < n; ++j) t.emplace_back(m.tw(i, j), b[r][i] * p[j]);
        t.emplace_back(m.off.t0 + i, -g1 * b[r][i]);
      }
    if (c[r] != 0.0)
      for (int j = 0; j < n; ++j) t.emplace_back(m.w0 + j, -c[r] * p[j]);
    g.add_constraint(std::move(t), lp::Relation::kEq, -g1 * c[r],
                     "set_w_mass_" + std::to_string(r));
  }
  m.census.family3_rows = g.num_rows() - m.f3_lo0;

  const auto& cs = m.census;
  const bool vars_ok =
      cs.lifted_vars == 2 * n * n + k * n + n &&
      g.num_vars() == k + n + 1 + 2 * n + cs.lifted_vars;
  const bool rows_ok = cs.base_rows == l + (improved ? 2 * n : n) + 1 &&
                       cs.family1_rows == 2 * n * n + n &&
                       cs.family2_rows == n * n + n &&
                       cs.family3_rows == 2 * l * n + l &&
                       g.num_rows() == cs.base_rows + cs.family1_rows +
                                           cs.family2_rows + cs.family3_rows;
  if (!vars_ok || !rows_ok)
    throw std::logic_error("rlt: construction audit failed");
  return m;
}

}  // namespace

RltModel build_rlt(const BilinearProgram& bp) { return build_impl(bp, false); }

RltModel build_rlt_improved(const BilinearProgram& bp,
                            const threshold::AlphaStarResult& cert) {
  if (bp.alpha() + 1e-12 < cert.alpha_star)
    throw std::invalid_argument(
        "rlt: improved variant needs alpha >= the jump-free threshold " +
        std::to_string(cert.alpha_star));
  return build_impl(bp, true);
}

RltModel build_rlt_shifted(const BilinearProgram& bp, Prob alpha_s,
                           Prob gamma_s) {
  if (!(alpha_s < gamma_s))
    throw std::invalid_argument("rlt: shifted levels need alpha_s < gamma_s");
  const auto& p = bp.probs();
  const double minp = *std::min_element(p.begin(), p.end());
  if (!(1.0 - gamma_s < minp))
    throw std::invalid_argument(
        "rlt: shifted variant needs 1 - gamma_s < min_i p_i (got 1 - gamma_s "
        "= " +
        std::to_string(1.0 - gamma_s) + ", min p = " + std::to_string(minp) +
        ")");
  return build_impl(BilinearProgram(bp.set(), bp.probs(), alpha_s, gamma_s),
                    false);
}

namespace {

// Row generation over the family-3 lo/hi products.  At any optimum at most
// num_vars rows can bind, so all but a sliver of the l*n*2 product rows are
// slack there; starting without them and pulling in only violated ones keeps
// the working LP near-square instead of 20x taller than wide, and removes
// the huge pinned-at-zero dual face those rows would otherwise contribute.
// Exact: the loop ends only when the incumbent satisfies every left-out row,
// whose duals are then 0.
lp::Solution solve_rlt_lazy(const RltModel& m, const lp::SolveOptions& opt) {
  const auto& full = m.lp;
  const int nrows = full.num_rows();
  const int ln = m.l * m.n;
  std::vector<char> out(nrows, 0);
  for (int r = 0; r < ln; ++r) out[m.f3_lo0 + r] = out[m.f3_hi0 + r] = 1;

  lp::LinearProgram sub;
  for (int j = 0; j < full.num_vars(); ++j) {
    const auto& v = full.var(j);
    sub.add_variable(v.name, v.lower, v.upper);
  }
  sub.set_sense(full.sense());
  sub.set_objective_offset(full.objective_offset());
  for (int j = 0; j < full.num_vars(); ++j)
    if (full.objective()[j] != 0.0) sub.set_objective(j, full.objective()[j]);

  std::vector<int> sub2full;
  sub2full.reserve(nrows);
  auto adopt = [&](int i) {
    const auto& r = full.row(i);
    sub.add_constraint(r.terms, r.rel, r.rhs, r.name);
    sub2full.push_back(i);
    out[i] = 0;
  };
  for (int i = 0; i < nrows; ++i)
    if (!out[i]) {
      const auto& r = full.row(i);
      sub.add_constraint(r.terms, r.rel, r.rhs, r.name);
      sub2full.push_back(i);
    }

  // Row scale for the violation tolerance.
  std::vector<double> rscale(nrows, 1.0);
  for (int i = 0; i < nrows; ++i)
    if (out[i]) {
      double sc = 1.0 + std::abs(full.row(i).rhs);
      for (auto& [j, c] : full.row(i).terms) sc = std::max(sc, std::abs(c));
      rscale[i] = sc;
    }

  constexpr int kPerRound = 2000;
  lp::Solution s;
  std::vector<std::pair<double, int>> viol;
  for (int round = 0; round < 200; ++round) {
    s = lp::solve_lp(sub, opt);
    if (s.status == lp::Status::kUnbounded) {
      // No iterate to price rows against; pull in the next slab blindly.
      int took = 0;
      for (int i = 0; i < nrows && took < 5000; ++i)
        if (out[i]) {
          adopt(i);
          ++took;
        }
      if (took == 0) {
        s.objective = -kInfV;
        return s;
      }
      continue;
    }
    if (s.status != lp::Status::kOptimal)
      throw std::runtime_error(std::string("rlt: solve failed: ") +
                               lp::to_string(s.status) +
                               (s.note.empty() ? "" : " (" + s.note + ")"));
    viol.clear();
    for (int i = 0; i < nrows; ++i) {
      if (!out[i]) continue;
      const auto& r = full.row(i);
      double act = 0.0;
      for (auto& [j, c] : r.terms) act += c * s.x[j];
      const double v = r.rel == lp::Relation::kLe   ? act - r.rhs
                       : r.rel == lp::Relation::kGe ? r.rhs - act
                                                    : std::abs(act - r.rhs);
      if (v > 10.0 * opt.feas_tol * rscale[i]) viol.emplace_back(v / rscale[i], i);
    }
    if (viol.empty()) {
      std::vector<double> duals(nrows, 0.0);
      for (std::size_t t = 0; t < sub2full.size(); ++t)
        duals[sub2full[t]] = s.duals[t];
      s.duals = std::move(duals);
      return s;
    }
    const std::size_t keep = std::min<std::size_t>(kPerRound, viol.size());
    std::partial_sort(viol.begin(), viol.begin() + keep, viol.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t t = 0; t < keep; ++t) adopt(viol[t].second);
  }
  throw std::runtime_error("rlt: row generation did not settle");
}

}  // namespace

lp::Solution solve_rlt(const RltModel& m, const lp::SolveOptions& opt) {
  // Product family 3 dominates the row count; beyond a few tens of
  // thousands of rows the direct solve stops being the fast path.
  if (2 * m.l * m.n >= 20000) return solve_rlt_lazy(m, opt);
  auto s = lp::solve_lp(m.lp, opt);
  if (s.status == lp::Status::kUnbounded) {
    s.objective = -kInfV;
    return s;
  }
  if (s.status != lp::Status::kOptimal)
    throw std::runtime_error(std::string("rlt: solve failed: ") +
                             lp::to_string(s.status) +
                             (s.note.empty() ? "" : " (" + s.note + ")"));
  return s;
}

}  // namespace quantband::rlt
