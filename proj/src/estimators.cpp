#include "quantband/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "quantband/altmin.hpp"
#include "quantband/programs.hpp"
#include "quantband/rlt.hpp"
#include "quantband/threshold.hpp"

namespace quantband::estimators {

namespace {

// Runs one estimator, recording wall time and tagging failures.
template <typename Fn>
double timed(EstimateReport& r, const std::string& tag, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  double value = 0.0;
  try {
    value = fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(tag + ": " + e.what());
  }
  r.timings[tag] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return value;
}

}  // namespace

EstimateReport estimate_var_min(const FeasibleSet& fs,
                                const std::vector<double>& probs, Prob gamma,
                                const EstimateConfig& cfg, std::string label) {
  check_probs(probs);
  if (static_cast<int>(probs.size()) != fs.num_scenarios())
    throw std::invalid_argument(
        "estimate_var_min: one probability per scenario required");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("estimate_var_min: gamma must lie in (0,1)");
  if (cfg.delta_prime.empty())
    throw std::invalid_argument("estimate_var_min: need at least one delta'");
  auto deltas = cfg.delta_prime;
  std::sort(deltas.begin(), deltas.end());
  for (double d : deltas)
    if (!(d > 0.0))
      throw std::invalid_argument("estimate_var_min: delta' must be positive");
  if (gamma + deltas.back() > 1.0 + 1e-12)
    throw std::invalid_argument(
        "estimate_var_min: gamma + max delta' exceeds 1");

  EstimateReport r;
  r.label = std::move(label);
  r.gamma = gamma;

  const auto cert = threshold::alpha_star(probs, gamma, cfg.b);
  r.alpha_star = cert.alpha_star;

  r.u1 = timed(r, "u1", [&] {
    auto s = var_ip(fs, probs, gamma, cfg.big_m, /*relax=*/true);
    if (s.status != lp::Status::kOptimal)
      throw std::runtime_error(std::string("relaxed quantile LP: ") +
                               lp::to_string(s.status));
    return s.objective;
  });
  if (cfg.with_ip_true)
    r.ip_true = timed(r, "ip_true", [&] {
      auto s = var_ip(fs, probs, gamma, cfg.big_m, /*relax=*/false);
      if (s.status != lp::Status::kOptimal)
        throw std::runtime_error(std::string("quantile IP: ") +
                                 lp::to_string(s.status));
      return s.objective;
    });

  BilinearProgram bp(fs, probs, cert.alpha_star, gamma);
  r.u2 = timed(r, "u2", [&] {
    return rlt::solve_rlt(rlt::build_rlt_improved(bp, cert)).objective;
  });

  r.o1 = timed(r, "o1", [&] {
    auto s = programs::cvar_min(fs, probs, gamma);
    if (s.status != lp::Status::kOptimal)
      throw std::runtime_error(std::string("tail average LP: ") +
                               lp::to_string(s.status));
    return s.objective;
  });

  const double minp = *std::min_element(probs.begin(), probs.end());
  double gshift = gamma + deltas.front();
  if (!(1.0 - gshift < minp)) {
    gshift = 1.0 - 0.5 * minp;
    if (gshift <= gamma) gshift = 0.5 * (gamma + 1.0);
    r.warnings.push_back(
        "o2: shifted level raised to " + std::to_string(gshift) +
        " so the relaxation is exact (gamma + min delta' was not)");
  }
  r.o2_gamma_shift = gshift;
  r.o2 = timed(r, "o2", [&] {
    return rlt::solve_rlt(rlt::build_rlt_shifted(bp, gamma, gshift)).objective;
  });

  for (double d : deltas) {
    r.o3[d] = timed(r, "o3(" + std::to_string(d) + ")", [&] {
      BilinearProgram band(fs, probs, gamma, gamma + d);
      return altmin::alternate_minimize(band, cfg.eps).value;
    });
  }

  r.u2_ge_u1 = r.u2 >= r.u1 - 1e-9;
  r.o3_monotone = true;
  for (auto it = r.o3.begin(); std::next(it) != r.o3.end(); ++it)
    if (it->second > std::next(it)->second + 1e-9) r.o3_monotone = false;

  return gap_metrics(r);
}

EstimateReport& gap_metrics(EstimateReport& r) {
  if (r.o3.empty())
    throw std::invalid_argument("gap_metrics: no alternating bound present");
  const double g1 = r.o1 - r.u1;
  const double our_g = r.o3.begin()->second - r.u2;
  r.g1 = g1;
  r.our_g = our_g;
  if (g1 > 1e-12) {
    r.imp_pct = (g1 - our_g) / g1 * 100.0;
  } else if (std::abs(our_g) <= 1e-12) {
    r.imp_pct = 100.0;  // both gaps closed
  } else {
    r.imp_pct.reset();
    r.warnings.push_back(
        "imp%: undefined (zero baseline gap with nonzero our gap)");
  }
  return r;
}

}  // namespace quantband::estimators
