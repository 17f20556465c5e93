#pragma once

#include <vector>

#include "quantband/prob.hpp"

namespace quantband::threshold {

// Result of the level-refinement loop.  alpha_star is the smallest tested
// level whose reachable-mass certificate o_star clears gamma; above it the
// quantile function has no jump inside (alpha_star, gamma), so the band
// expectation over (alpha, gamma] equals the gamma-quantile for every
// alpha in [alpha_star, gamma).
struct AlphaStarResult {
  double alpha_star = 0.0;
  // Smallest subset mass >= alpha_star; >= gamma on return.
  double o_star = 0.0;
  // 0/1 picks realizing o_star.
  std::vector<int> eta;
  // Number of refinement steps (= integer programs solved).
  int iterations = 0;
};

// Geometric refinement alpha <- alpha + (gamma - alpha)/b.  At each level an
// integer program finds the smallest achievable cumulative mass O >= alpha;
// the loop stops once O >= gamma.  Requires gamma > 0 and b >= 2.
AlphaStarResult alpha_star(const std::vector<double>& probs, Prob gamma,
                           int b = 10);

}  // namespace quantband::threshold
