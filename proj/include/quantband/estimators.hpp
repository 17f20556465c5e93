#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quantband/model.hpp"
#include "quantband/prob.hpp"

namespace quantband::estimators {

struct EstimateConfig {
  // Shifted upper levels for the alternating overestimate, one value per
  // column; the smallest one also sets the shifted-relaxation level.
  std::vector<double> delta_prime{0.007, 0.01};
  int b = 10;         // threshold search granularity
  double eps = 1e-6;  // alternating minimization tolerance
  bool with_ip_true = false;
  std::optional<double> big_m;  // forwarded to the quantile IP and U1
};

// One row of the estimate table for min VaR_gamma over a feasible set.
struct EstimateReport {
  std::string label;
  double gamma = 0.0;

  std::optional<double> ip_true;  // exact quantile minimum, when requested
  double u1 = 0.0;                // LP relaxation of the quantile IP
  double u2 = 0.0;                // improved relaxation at the threshold level
  double o1 = 0.0;                // tail-average minimization
  double o2 = 0.0;                // shifted relaxation (exact at its levels)
  std::map<double, double> o3;    // delta' -> alternating bound

  std::optional<double> g1;       // o1 - u1
  std::optional<double> our_g;    // o3(smallest delta') - u2
  std::optional<double> imp_pct;  // (g1 - our_g)/g1 * 100

  // Observed orderings; reported, never asserted.
  bool u2_ge_u1 = false;
  bool o3_monotone = false;  // smaller delta' at least as tight

  double alpha_star = 0.0;      // lower level used for u2
  double o2_gamma_shift = 0.0;  // upper level actually used by o2

  std::map<std::string, double> timings;   // estimator -> seconds
  std::map<std::string, double> metadata;  // run knobs, merged into reports
  std::vector<std::string> warnings;
};

// Runs all five estimators (plus the exact IP when configured) and fills the
// gap columns.  The shifted-relaxation level gamma + min delta' is raised to
// 1 - min(p)/2 when it does not exceed 1 - min(p), since the relaxation is
// only an overestimate where it is exact; a warning records the raise.
EstimateReport estimate_var_min(const FeasibleSet& fs,
                                const std::vector<double>& probs, Prob gamma,
                                const EstimateConfig& cfg = {},
                                std::string label = {});

// Fills g1, our_g and imp_pct from u1/o1/u2/o3.  Zero g1 yields 100 when
// our_g is also zero, otherwise the percentage is left unset with a warning.
EstimateReport& gap_metrics(EstimateReport& r);

}  // namespace quantband::estimators
