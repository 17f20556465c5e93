#include "quantband/altmin.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "quantband/programs.hpp"

namespace quantband::altmin {

AltMinResult alternate_minimize(const BilinearProgram& bp, double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("alternate_minimize: eps must be positive");
  constexpr int kMaxRounds = 10000;

  const int n = bp.set().num_scenarios();
  AltMinResult out;

  auto xt = programs::find_xt(bp, std::vector<double>(n, 0.0));
  out.trace.push_back(xt.value);
  auto w = programs::find_w(bp, xt.x, xt.t);
  out.trace.push_back(w.value);
  out.iterations = 1;

  while (std::abs(w.value - xt.value) > eps) {
    if (out.iterations >= kMaxRounds)
      throw std::runtime_error(
          "alternate_minimize: no convergence after 10000 rounds");
    xt = programs::find_xt(bp, w.wprime);
    out.trace.push_back(xt.value);
    w = programs::find_w(bp, xt.x, xt.t);
    out.trace.push_back(w.value);
    ++out.iterations;
  }
  out.value = xt.value;
  return out;
}

}  // namespace quantband::altmin
