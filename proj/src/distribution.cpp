#include "quantband/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace quantband {

DiscreteDistribution::DiscreteDistribution(std::vector<double> values,
                                           std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw std::invalid_argument("distribution needs matching non-empty value/prob lists");
  for (double p : probs)
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("atom probabilities must be positive");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("atom values must be finite");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > kTol)
    throw std::invalid_argument("atom probabilities must sum to 1");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  value_.reserve(order.size());
  prob_.reserve(order.size());
  cum_.reserve(order.size());
  double run = 0.0;
  for (std::size_t i : order) {
    value_.push_back(values[i]);
    prob_.push_back(probs[i]);
    run += probs[i];
    cum_.push_back(run);
  }
  cum_.back() = 1.0;  // kill accumulated rounding at the top
}

double DiscreteDistribution::quantile(Prob p) const {
  if (p.value() <= 0.0) throw std::invalid_argument("quantile needs p > 0");
  // First atom whose cumulative mass reaches p (up to rounding slack).
  for (std::size_t i = 0; i < cum_.size(); ++i)
    if (cum_[i] >= p.value() - 1e-12) return value_[i];
  return value_.back();
}

double DiscreteDistribution::iqf(Prob p) const {
  const double target = p.value();
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < cum_.size(); ++i) {
    if (cum_[i] < target - 1e-12) {
      acc += value_[i] * prob_[i];
      prev = cum_[i];
    } else {
      acc += value_[i] * (target - prev);
      return acc;
    }
  }
  return acc;
}

double DiscreteDistribution::expectation_slice(Prob alpha, Prob gamma) const {
  if (!(alpha.value() < gamma.value()))
    throw std::invalid_argument("expectation_slice needs alpha < gamma");
  return (iqf(gamma) - iqf(alpha)) / (gamma.value() - alpha.value());
}

}  // namespace quantband
