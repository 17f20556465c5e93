#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>

namespace quantband {

// Default absolute tolerance for probability and objective comparisons.
inline constexpr double kTol = 1e-9;

// A probability level in [0, 1].  Construction rejects values outside the
// interval (beyond a tiny rounding allowance) and clamps the rest, so that
// downstream arithmetic never sees -1e-17 or 1+1e-17.
class Prob {
 public:
  Prob(double v) : v_(v) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
      throw std::invalid_argument("probability level out of [0,1]: " +
                                  std::to_string(v));
    v_ = std::clamp(v_, 0.0, 1.0);
  }

  operator double() const noexcept { return v_; }
  double value() const noexcept { return v_; }

 private:
  double v_;
};

}  // namespace quantband
