#pragma once

#include <cstddef>
#include <vector>

#include "quantband/prob.hpp"

namespace quantband {

// Finite discrete distribution given by atoms (value_i, prob_i).
//
// The quantile function is the usual generalized inverse
//   F^{-1}(p) = inf { t : F(t) >= p },
// and iqf(p) = integral of F^{-1} over (0, p] is its running integral, a
// piecewise-linear convex function of p.  The band expectation
//   E[alpha, gamma] = (iqf(gamma) - iqf(alpha)) / (gamma - alpha)
// averages the quantile function over the band (alpha, gamma]; it recovers
// CVaR_alpha at gamma = 1 and tends to VaR_gamma as alpha -> gamma.
class DiscreteDistribution {
 public:
  // Atoms need not be sorted or distinct; probabilities must be positive and
  // sum to 1 within 1e-9.
  DiscreteDistribution(std::vector<double> values, std::vector<double> probs);

  std::size_t size() const noexcept { return value_.size(); }
  // Atoms sorted by value; equal values are kept as separate atoms.
  const std::vector<double>& values() const noexcept { return value_; }
  const std::vector<double>& probs() const noexcept { return prob_; }

  // F^{-1}(p); rejects p = 0.
  double quantile(Prob p) const;

  // Integral of F^{-1} over (0, p]; iqf(0) = 0.
  double iqf(Prob p) const;

  // Average of F^{-1} over (alpha, gamma]; requires alpha < gamma.
  double expectation_slice(Prob alpha, Prob gamma) const;

  double mean() const { return iqf(1.0); }

 private:
  std::vector<double> value_;  // ascending
  std::vector<double> prob_;
  std::vector<double> cum_;    // cum_[i] = prob_[0] + ... + prob_[i]
};

}  // namespace quantband
