#include "quantband/programs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace quantband::programs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct JointDual {
  lp::LinearProgram lp;
  int s_col = 0, theta0 = 0, w0 = 0;
};

// min over (s, theta, w') of the band objective for a fixed loss vector.
JointDual build_joint_dual(const std::vector<double>& t,
                           const std::vector<double>& probs, double alpha,
                           double gamma) {
  const int n = static_cast<int>(probs.size());
  const double scale = 1.0 / (gamma - alpha);

  JointDual out;
  auto& m = out.lp;
  out.s_col = m.add_variable("s", -kInf, kInf);
  out.theta0 = m.num_vars();
  for (int i = 0; i < n; ++i)
    m.add_variable("theta_" + std::to_string(i), 0.0, kInf);
  out.w0 = m.num_vars();
  for (int i = 0; i < n; ++i)
    m.add_variable("wprime_" + std::to_string(i), 0.0, 1.0);

  m.set_objective(out.s_col, (1.0 - alpha) * scale);
  for (int i = 0; i < n; ++i) {
    m.set_objective(out.theta0 + i, scale);
    m.set_objective(out.w0 + i, -t[i] * probs[i] * scale);
  }
  for (int i = 0; i < n; ++i)
    m.add_constraint({{out.theta0 + i, 1.0}, {out.s_col, probs[i]}},
                     lp::Relation::kGe, probs[i] * t[i],
                     "tail_" + std::to_string(i));
  std::vector<std::pair<int, double>> mass;
  for (int i = 0; i < n; ++i) mass.emplace_back(out.w0 + i, probs[i]);
  m.add_constraint(mass, lp::Relation::kEq, 1.0 - gamma, "band_mass");
  return out;
}

void check_levels(double alpha, double gamma) {
  if (!(alpha < gamma))
    throw std::invalid_argument("band levels: requires alpha < gamma");
}

}  // namespace

double expectation_via_dual(const std::vector<double>& t,
                            const std::vector<double>& probs, Prob alpha,
                            Prob gamma) {
  check_probs(probs);
  check_levels(alpha, gamma);
  if (t.size() != probs.size())
    throw std::invalid_argument("expectation_via_dual: size mismatch");
  for (double v : t)
    if (!std::isfinite(v))
      throw std::invalid_argument("expectation_via_dual: non-finite loss");
  auto m = build_joint_dual(t, probs, alpha, gamma);
  auto s = lp::solve_lp(m.lp);
  if (s.status != lp::Status::kOptimal)
    throw std::runtime_error("expectation_via_dual: LP not optimal: " + s.note);
  return s.objective;
}

lp::Solution cvar_min(const FeasibleSet& fs, const std::vector<double>& probs,
                      Prob gamma) {
  check_probs(probs);
  const int n = fs.num_scenarios();
  if (static_cast<int>(probs.size()) != n)
    throw std::invalid_argument("cvar_min: one probability per scenario required");
  if (!(static_cast<double>(gamma) < 1.0))
    throw std::invalid_argument("cvar_min: requires gamma < 1");

  lp::LinearProgram m;
  auto off = fs.append_to(m);
  const int eta = m.add_variable("eta", -kInf, kInf);
  const int phi0 = m.num_vars();
  for (int i = 0; i < n; ++i)
    m.add_variable("phi_" + std::to_string(i), 0.0, kInf);
  m.set_objective(eta, 1.0);
  const double scale = 1.0 / (1.0 - gamma);
  for (int i = 0; i < n; ++i) {
    m.set_objective(phi0 + i, probs[i] * scale);
    m.add_constraint({{off.t0 + i, 1.0}, {eta, -1.0}, {phi0 + i, -1.0}},
                     lp::Relation::kLe, 0.0, "excess_" + std::to_string(i));
  }
  return lp::solve_lp(m);
}

XtResult find_xt(const BilinearProgram& bp, const std::vector<double>& wprime) {
  const int n = bp.set().num_scenarios();
  if (static_cast<int>(wprime.size()) != n)
    throw std::invalid_argument("find_xt: w' has wrong length");
  bool all_zero = true;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    if (wprime[i] < -1e-8 || wprime[i] > 1.0 + 1e-8)
      throw std::invalid_argument("find_xt: w' outside the unit box");
    if (std::abs(wprime[i]) > 1e-12) all_zero = false;
    mass += wprime[i] * bp.probs()[i];
  }
  if (!all_zero && std::abs(mass - (1.0 - bp.gamma())) > 1e-8)
    throw std::invalid_argument("find_xt: w' mass differs from 1 - gamma");

  auto m = detail::build_fixed_w_lp(bp, wprime);
  auto s = lp::solve_lp(m.lp);
  if (s.status != lp::Status::kOptimal)
    throw std::runtime_error("find_xt: LP not optimal: " + s.note);

  XtResult out;
  out.value = s.objective;
  out.x.assign(s.x.begin() + m.off.x0, s.x.begin() + m.off.x0 + bp.set().dim_x());
  out.t.assign(s.x.begin() + m.off.t0, s.x.begin() + m.off.t0 + n);
  out.w.resize(n);
  for (int i = 0; i < n; ++i)
    out.w[i] = m.denom * s.duals[m.tail_row0 + i];
  return out;
}

WResult find_w(const BilinearProgram& bp, const std::vector<double>& x,
               const std::vector<double>& t) {
  const auto& fs = bp.set();
  if (static_cast<int>(x.size()) != fs.dim_x() ||
      static_cast<int>(t.size()) != fs.num_scenarios())
    throw std::invalid_argument("find_w: point has wrong dimensions");
  for (int r = 0; r < fs.num_rows(); ++r) {
    double act = 0.0;
    for (int j = 0; j < fs.dim_x(); ++j) act += fs.a()[r][j] * x[j];
    for (int i = 0; i < fs.num_scenarios(); ++i) act += fs.b()[r][i] * t[i];
    if (act > fs.c()[r] + 1e-8)
      throw std::invalid_argument("find_w: point violates set row " + std::to_string(r));
  }

  auto m = build_joint_dual(t, bp.probs(), bp.alpha(), bp.gamma());
  auto s = lp::solve_lp(m.lp);
  if (s.status != lp::Status::kOptimal)
    throw std::runtime_error("find_w: LP not optimal: " + s.note);
  WResult out;
  out.value = s.objective;
  out.wprime.assign(s.x.begin() + m.w0,
                    s.x.begin() + m.w0 + fs.num_scenarios());
  return out;
}

}  // namespace quantband::programs
