#pragma once

#include <utility>

#include "quantband/lp.hpp"
#include "quantband/model.hpp"
#include "quantband/prob.hpp"
#include "quantband/threshold.hpp"

namespace quantband::rlt {

// Linear relaxation of the bilinear band-minimization program obtained by
// multiplying every defining row of the tail polytope and of the feasible
// set with the w' box/mass rows, then replacing each variable product with a
// fresh column:
//   Tw_i_j  = T_i * w'_j     thw_i_j = theta_i * w'_j
//   xw_l_j  = x_l  * w'_j    sw_i    = s * w'_i
// Product families (one per source row group):
//   1. tail rows  theta_i + s p_i - T_i p_i >= 0
//   2. theta_i >= 0   (its w'_j >= 0 product becomes the bound thw_i_j >= 0)
//   3. set rows   A x + B T <= c
// each crossed with w'_j >= 0 ("lo"), 1 - w'_j >= 0 ("hi") and with the mass
// row sum_j w'_j p_j = 1 - gamma ("mass", kept as an equality with its
// symbolic w' terms).
struct RltModel {
  explicit RltModel(BilinearProgram bp) : src(std::move(bp)) {}

  BilinearProgram src;  // program (levels, probs, set) the LP encodes
  lp::LinearProgram lp;

  // Column offsets.
  FeasibleSet::Offsets off;  // x, T
  int s_col = 0, theta0 = 0, w0 = 0;
  int tw0 = 0, xw0 = 0, thw0 = 0, sw0 = 0;

  int tw(int i, int j) const { return tw0 + i * n + j; }
  int xw(int r, int j) const { return xw0 + r * n + j; }
  int thw(int i, int j) const { return thw0 + i * n + j; }
  int sw(int i) const { return sw0 + i; }

  // Row offsets (set rows occupy [0, l)).
  int tail_row0 = 0, mass_row = 0;
  int f1_lo0 = 0, f1_hi0 = 0, f1_mass0 = 0;
  int f2_hi0 = 0, f2_mass0 = 0;
  int f3_lo0 = 0, f3_hi0 = 0, f3_mass0 = 0;

  int n = 0, k = 0, l = 0;
  bool improved = false;

  struct Census {
    int lifted_vars = 0;     // n^2 + n^2 + k n + n
    int lifted_bounds = 0;   // thw >= 0 bounds, n^2
    int base_rows = 0;       // l set rows + tail rows + mass row
    int family1_rows = 0;    // n^2 + n^2 + n
    int family2_rows = 0;    // n^2 + n
    int family3_rows = 0;    // 2 l n + l
  } census;
};

// Plain relaxation; its optimum is a lower bound on the exact bilinear
// minimum, and matches it whenever 1 - gamma < min_i p_i (the w' polytope is
// then a simplex).
RltModel build_rlt(const BilinearProgram& bp);

// Tightened variant, valid for quantile minimization when alpha clears the
// jump-free threshold (pass the certificate from threshold::alpha_star):
//   (a) the diagonal theta_i >= thw_i_i becomes an equality;
//   (b) each plain tail row is replaced by
//       theta_i + sw_i p_i - Tw_i_i p_i = 0  and
//       s - sw_i - T_i + Tw_i_i >= 0.
// Rejects bp.alpha() < cert.alpha_star.
RltModel build_rlt_improved(const BilinearProgram& bp,
                            const threshold::AlphaStarResult& cert);

// Plain relaxation rebuilt at shifted levels (alpha_s, gamma_s); requires
// gamma_s > 1 - min_i p_i, which makes the relaxation exact, so the value is
// the true band minimum at the shifted levels and overestimates the optimum
// at any band sitting at or below it.
RltModel build_rlt_shifted(const BilinearProgram& bp, Prob alpha_s,
                           Prob gamma_s);

// Solves the model's LP.  Unbounded solves return objective -inf; stalls and
// infeasibility (impossible for a well-formed model) throw.
lp::Solution solve_rlt(const RltModel& m, const lp::SolveOptions& opt = {});

}  // namespace quantband::rlt
