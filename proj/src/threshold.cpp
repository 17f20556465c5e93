#include "quantband/threshold.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "quantband/lp.hpp"
#include "quantband/model.hpp"

namespace quantband::threshold {

namespace {

// Smallest achievable mass >= level, as a MIP over subset indicators.
struct MassStep {
  double o_star;
  std::vector<int> eta;
};

MassStep min_mass_at_least(const std::vector<double>& probs, double level) {
  const int n = static_cast<int>(probs.size());
  lp::LinearProgram m;
  const int o = m.add_variable("O", 0.0, 1.0);
  m.set_objective(o, 1.0);
  std::vector<std::pair<int, double>> cover{{o, 1.0}};
  std::vector<std::pair<int, double>> reach;
  for (int i = 0; i < n; ++i) {
    const int z = m.add_binary("eta_" + std::to_string(i));
    cover.emplace_back(z, -probs[i]);
    reach.emplace_back(z, probs[i]);
  }
  m.add_constraint(cover, lp::Relation::kGe, 0.0, "dominates");
  m.add_constraint(reach, lp::Relation::kGe, level, "reaches");
  auto s = lp::solve_mip(m);
  if (s.status != lp::Status::kOptimal)
    throw std::runtime_error("alpha_star: inner integer program failed: " + s.note);
  MassStep out;
  out.o_star = s.objective;
  out.eta.resize(n);
  for (int i = 0; i < n; ++i)
    out.eta[i] = s.x[1 + i] > 0.5 ? 1 : 0;
  return out;
}

}  // namespace

AlphaStarResult alpha_star(const std::vector<double>& probs, Prob gamma, int b) {
  check_probs(probs);
  const double g = gamma;
  if (!(g > 0.0)) throw std::invalid_argument("alpha_star: requires gamma > 0");
  if (b < 2) throw std::invalid_argument("alpha_star: requires b >= 2");

  const int cap = 10 * b * static_cast<int>(probs.size());
  double alpha = 0.0;
  for (int k = 1; k <= cap; ++k) {
    alpha += (g - alpha) / b;
    auto step = min_mass_at_least(probs, alpha);
    if (step.o_star >= g - 1e-9) {
      AlphaStarResult out;
      out.alpha_star = alpha;
      out.o_star = step.o_star;
      out.eta = std::move(step.eta);
      out.iterations = k;
      return out;
    }
  }
  throw std::runtime_error("alpha_star: refinement failed to terminate");
}

}  // namespace quantband::threshold
