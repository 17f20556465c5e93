#include "quantband/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace quantband {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void check_probs(const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("probs: empty vector");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) throw std::invalid_argument("probs: entries must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("probs: sum differs from 1 by more than 1e-9");
}

FeasibleSet::FeasibleSet(std::vector<std::vector<double>> a,
                         std::vector<std::vector<double>> b,
                         std::vector<double> c,
                         std::vector<std::string> x_names,
                         std::vector<std::string> t_names,
                         std::optional<std::vector<double>> t_lower,
                         std::optional<std::vector<double>> t_upper)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)),
      x_names_(std::move(x_names)), t_names_(std::move(t_names)),
      t_lower_(std::move(t_lower)), t_upper_(std::move(t_upper)) {
  l_ = static_cast<int>(a_.size());
  if (l_ == 0 || static_cast<int>(b_.size()) != l_ ||
      static_cast<int>(c_.size()) != l_)
    throw std::invalid_argument("feasible set: need matching A, B, c with >= 1 row");
  k_ = static_cast<int>(a_[0].size());
  n_ = static_cast<int>(b_[0].size());
  if (n_ == 0) throw std::invalid_argument("feasible set: no loss coordinates");
  for (int r = 0; r < l_; ++r) {
    if (static_cast<int>(a_[r].size()) != k_ ||
        static_cast<int>(b_[r].size()) != n_)
      throw std::invalid_argument("feasible set: ragged matrix row " + std::to_string(r));
    for (double v : a_[r])
      if (!std::isfinite(v)) throw std::invalid_argument("feasible set: non-finite A entry");
    for (double v : b_[r])
      if (!std::isfinite(v)) throw std::invalid_argument("feasible set: non-finite B entry");
    if (!std::isfinite(c_[r])) throw std::invalid_argument("feasible set: non-finite c entry");
  }
  if (x_names_.empty())
    for (int j = 0; j < k_; ++j) x_names_.push_back("x_" + std::to_string(j));
  if (t_names_.empty())
    for (int i = 0; i < n_; ++i) t_names_.push_back("T_" + std::to_string(i));
  if (static_cast<int>(x_names_.size()) != k_ ||
      static_cast<int>(t_names_.size()) != n_)
    throw std::invalid_argument("feasible set: name count mismatch");
  if (t_lower_.has_value() != t_upper_.has_value())
    throw std::invalid_argument("feasible set: loss bounds need both sides");
  if (t_lower_) {
    if (static_cast<int>(t_lower_->size()) != n_ ||
        static_cast<int>(t_upper_->size()) != n_)
      throw std::invalid_argument("feasible set: loss bound size mismatch");
    for (int i = 0; i < n_; ++i) {
      if (std::isnan((*t_lower_)[i]) || std::isnan((*t_upper_)[i]) ||
          (*t_lower_)[i] > (*t_upper_)[i])
        throw std::invalid_argument("feasible set: bad loss bound at " + std::to_string(i));
    }
  }

  lp::LinearProgram probe;
  append_to(probe);
  auto s = lp::solve_lp(probe);
  if (s.status == lp::Status::kInfeasible)
    throw std::invalid_argument("feasible set: empty polyhedron");
  if (s.status != lp::Status::kOptimal)
    throw std::runtime_error("feasible set: feasibility probe failed: " + s.note);
}

double FeasibleSet::t_lower(int i) const {
  return t_lower_ ? (*t_lower_)[i] : -kInf;
}

double FeasibleSet::t_upper(int i) const {
  return t_upper_ ? (*t_upper_)[i] : kInf;
}

FeasibleSet::Offsets FeasibleSet::append_to(lp::LinearProgram& m) const {
  Offsets off;
  off.x0 = m.num_vars();
  for (int j = 0; j < k_; ++j) m.add_variable(x_names_[j], -kInf, kInf);
  off.t0 = m.num_vars();
  for (int i = 0; i < n_; ++i)
    m.add_variable(t_names_[i], t_lower(i), t_upper(i));
  std::vector<std::pair<int, double>> terms;
  for (int r = 0; r < l_; ++r) {
    terms.clear();
    for (int j = 0; j < k_; ++j)
      if (a_[r][j] != 0.0) terms.emplace_back(off.x0 + j, a_[r][j]);
    for (int i = 0; i < n_; ++i)
      if (b_[r][i] != 0.0) terms.emplace_back(off.t0 + i, b_[r][i]);
    m.add_constraint(terms, lp::Relation::kLe, c_[r]);
  }
  return off;
}

FeasibleSet::TBox FeasibleSet::t_box() const {
  TBox box;
  if (t_lower_) {
    box.lower = *t_lower_;
    box.upper = *t_upper_;
    return box;
  }
  box.lower.assign(n_, -kInf);
  box.upper.assign(n_, kInf);
  for (int i = 0; i < n_; ++i) {
    for (int dir = 0; dir < 2; ++dir) {
      lp::LinearProgram m;
      auto off = append_to(m);
      m.set_sense(dir == 0 ? lp::Sense::kMinimize : lp::Sense::kMaximize);
      m.set_objective(off.t0 + i, 1.0);
      auto s = lp::solve_lp(m);
      if (s.status == lp::Status::kOptimal)
        (dir == 0 ? box.lower[i] : box.upper[i]) = s.objective;
      else if (s.status != lp::Status::kUnbounded)
        throw std::runtime_error("loss box probe failed: " + s.note);
    }
  }
  return box;
}

BilinearProgram::BilinearProgram(FeasibleSet fs, std::vector<double> probs,
                                 Prob alpha, Prob gamma)
    : fs_(std::move(fs)), probs_(std::move(probs)), alpha_(alpha), gamma_(gamma) {
  check_probs(probs_);
  if (static_cast<int>(probs_.size()) != fs_.num_scenarios())
    throw std::invalid_argument("bilinear program: one probability per scenario required");
  if (!(alpha_ < gamma_))
    throw std::invalid_argument("bilinear program: requires alpha < gamma");
}

double evaluate_objective(const BilinearProgram& bp, const BilinearPoint& psi) {
  const int k = bp.set().dim_x();
  const int n = bp.set().num_scenarios();
  if (static_cast<int>(psi.x.size()) != k ||
      static_cast<int>(psi.t.size()) != n ||
      static_cast<int>(psi.theta.size()) != n ||
      static_cast<int>(psi.wprime.size()) != n)
    throw std::invalid_argument("evaluate_objective: dimension mismatch");
  double acc = (1.0 - bp.alpha()) * psi.s;
  for (int i = 0; i < n; ++i)
    acc += psi.theta[i] - psi.t[i] * bp.probs()[i] * psi.wprime[i];
  return acc / bp.width();
}

namespace detail {

FixedWModel build_fixed_w_lp(const BilinearProgram& bp,
                             const std::vector<double>& wprime) {
  const auto& fs = bp.set();
  const int n = fs.num_scenarios();
  if (static_cast<int>(wprime.size()) != n)
    throw std::invalid_argument("fixed-w LP: w' has wrong length");
  const auto& p = bp.probs();
  bool all_zero = true;
  for (double v : wprime)
    if (std::abs(v) > 1e-12) all_zero = false;

  FixedWModel out;
  out.denom = all_zero ? 1.0 - bp.alpha() : bp.width();
  const double scale = 1.0 / out.denom;
  auto& m = out.lp;
  out.off = fs.append_to(m);
  out.s_col = m.add_variable("s", -kInf, kInf);
  out.theta0 = m.num_vars();
  for (int i = 0; i < n; ++i)
    m.add_variable("theta_" + std::to_string(i), 0.0, kInf);

  m.set_objective(out.s_col, (1.0 - bp.alpha()) * scale);
  for (int i = 0; i < n; ++i) {
    m.set_objective(out.theta0 + i, scale);
    if (wprime[i] != 0.0)
      m.set_objective(out.off.t0 + i, -p[i] * wprime[i] * scale);
  }
  out.tail_row0 = m.num_rows();
  for (int i = 0; i < n; ++i)
    m.add_constraint({{out.theta0 + i, 1.0},
                      {out.s_col, p[i]},
                      {out.off.t0 + i, -p[i]}},
                     lp::Relation::kGe, 0.0, "tail_" + std::to_string(i));
  return out;
}

}  // namespace detail

double solve_exact_small(const BilinearProgram& bp) {
  const int n = bp.set().num_scenarios();
  if (n > 14)
    throw std::invalid_argument("solve_exact_small: vertex enumeration capped at n = 14");
  const auto& p = bp.probs();
  const double target = 1.0 - bp.gamma();
  constexpr double kMassTol = 1e-12;

  double best = kInf;
  bool solved_any = false;
  auto eval_vertex = [&](const std::vector<double>& w) {
    auto m = detail::build_fixed_w_lp(bp, w);
    auto s = lp::solve_lp(m.lp);
    if (s.status == lp::Status::kUnbounded) {
      best = -kInf;
      solved_any = true;
      return;
    }
    if (s.status != lp::Status::kOptimal)
      throw std::runtime_error("solve_exact_small: vertex LP failed: " + s.note);
    solved_any = true;
    best = std::min(best, s.objective);
  };

  // DFS over supports with mass <= target; a vertex is either an exact-mass
  // subset or a subset closed by one strictly fractional coordinate.
  std::vector<char> in(n, 0);
  std::vector<double> w(n, 0.0);
  auto rec = [&](auto&& self, int idx, double mass) -> void {
    if (best == -kInf) return;
    if (idx == n) {
      if (std::abs(mass - target) <= kMassTol) {
        for (int i = 0; i < n; ++i) w[i] = in[i] ? 1.0 : 0.0;
        eval_vertex(w);
      } else {
        const double rest = target - mass;
        for (int f = 0; f < n; ++f) {
          if (in[f]) continue;
          const double frac = rest / p[f];
          if (frac <= kMassTol || frac >= 1.0 - kMassTol) continue;
          for (int i = 0; i < n; ++i) w[i] = in[i] ? 1.0 : 0.0;
          w[f] = frac;
          eval_vertex(w);
        }
      }
      return;
    }
    self(self, idx + 1, mass);
    if (mass + p[idx] <= target + kMassTol) {
      in[idx] = 1;
      self(self, idx + 1, mass + p[idx]);
      in[idx] = 0;
    }
  };
  rec(rec, 0, 0.0);
  if (!solved_any)
    throw std::runtime_error("solve_exact_small: no w' vertex found (bad probs?)");
  return best;
}

VarIpModel build_var_ip(const FeasibleSet& fs, const std::vector<double>& probs,
                        Prob gamma, std::optional<double> big_m, bool relax) {
  check_probs(probs);
  const int n = fs.num_scenarios();
  if (static_cast<int>(probs.size()) != n)
    throw std::invalid_argument("var_ip: one probability per scenario required");

  auto box = fs.t_box();
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < n; ++i) {
    lo = std::min(lo, box.lower[i]);
    hi = std::max(hi, box.upper[i]);
  }

  std::vector<double> m_i(n);
  for (int i = 0; i < n; ++i) {
    m_i[i] = big_m ? *big_m : box.upper[i] - lo;
    if (!std::isfinite(m_i[i]))
      throw std::invalid_argument(
          "var_ip: cannot derive a finite big-M for scenario " + std::to_string(i) +
          "; pass one explicitly");
  }

  VarIpModel out;
  auto off = fs.append_to(out.lp);
  out.x0 = off.x0;
  out.t0 = off.t0;
  out.kappa = out.lp.add_variable("kappa", lo, hi);
  out.lp.set_objective(out.kappa, 1.0);
  out.z0 = out.lp.num_vars();
  std::vector<std::pair<int, double>> mass;
  for (int i = 0; i < n; ++i) {
    const int z = relax ? out.lp.add_variable("z_" + std::to_string(i), 0.0, 1.0)
                        : out.lp.add_binary("z_" + std::to_string(i));
    mass.emplace_back(z, probs[i]);
  }
  out.lp.add_constraint(mass, lp::Relation::kGe, static_cast<double>(gamma), "coverage");
  for (int i = 0; i < n; ++i)
    out.lp.add_constraint(
        {{out.t0 + i, 1.0}, {out.kappa, -1.0}, {out.z0 + i, m_i[i]}},
        lp::Relation::kLe, m_i[i], "peak_" + std::to_string(i));
  return out;
}

lp::Solution var_ip(const FeasibleSet& fs, const std::vector<double>& probs,
                    Prob gamma, std::optional<double> big_m, bool relax) {
  auto model = build_var_ip(fs, probs, gamma, big_m, relax);
  return relax ? lp::solve_lp(model.lp) : lp::solve_mip(model.lp);
}

}  // namespace quantband
