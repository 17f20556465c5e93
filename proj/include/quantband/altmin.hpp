#pragma once

#include <vector>

#include "quantband/model.hpp"

namespace quantband::altmin {

struct AltMinResult {
  double value = 0.0;  // last x-step value, an upper bound on the band optimum
  int iterations = 0;  // completed (x-step, w-step) rounds
  std::vector<double> trace;  // every step value in order, non-increasing
};

// Alternating minimization: start from w' = 0 (the full upper tail), solve
// the x-step, then the w-step at the returned losses, and repeat until two
// consecutive values agree within eps.  Each step minimizes the same
// objective over a superset of the previous argument, so the trace cannot
// increase; the result lies between the tail-average minimum at alpha and
// the exact band minimum.
AltMinResult alternate_minimize(const BilinearProgram& bp, double eps = 1e-6);

}  // namespace quantband::altmin
