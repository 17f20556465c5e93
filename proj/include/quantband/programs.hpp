#pragma once

#include <vector>

#include "quantband/model.hpp"
#include "quantband/prob.hpp"

namespace quantband::programs {

// Band expectation of a fixed loss vector, computed as the joint LP
//   min (1/(gamma-alpha)) [ (1-alpha) s + sum theta_i - sum T_i p_i w'_i ]
//   s.t. theta_i + s p_i >= p_i T_i, theta >= 0,
//        w' in [0,1]^n, sum w'_i p_i = 1 - gamma.
// Agrees with DiscreteDistribution::expectation_slice by LP duality.
double expectation_via_dual(const std::vector<double>& t,
                            const std::vector<double>& probs, Prob alpha,
                            Prob gamma);

// min over the set of CVaR_gamma, via the pointwise-max form
//   min eta + (1/(1-gamma)) sum_i p_i phi_i, phi_i >= T_i - eta, phi >= 0.
// Requires gamma < 1.  Column layout: [ x | T | eta | phi ].
lp::Solution cvar_min(const FeasibleSet& fs, const std::vector<double>& probs,
                      Prob gamma);

// One x-step of the alternating scheme: minimize over (x, T, s, theta) with
// w' held fixed.  w' must lie in the w' polytope within 1e-8, except the
// all-zero start vector which is always accepted and stands for the full
// band (alpha, 1]; its value is then the minimal upper-tail average.
struct XtResult {
  double value = 0.0;
  std::vector<double> x;
  std::vector<double> t;
  // Tail-row duals scaled by the band width; the optimal mass allocation of
  // the inner maximization (dominates any optimal w' componentwise).
  std::vector<double> w;
};
XtResult find_xt(const BilinearProgram& bp, const std::vector<double>& wprime);

// One w-step: minimize over (s, theta, w') with (x, T) held fixed; equals
// the band expectation of t.  (x, t) must satisfy the set rows within 1e-8.
struct WResult {
  double value = 0.0;
  std::vector<double> wprime;
};
WResult find_w(const BilinearProgram& bp, const std::vector<double>& x,
               const std::vector<double>& t);

}  // namespace quantband::programs
