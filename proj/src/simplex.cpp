// Bounded-variable two-phase revised simplex.
//
// The model is brought to computational form  min c.z, Az = b, lo <= z <= up
// by appending one slack per row (bounds encode the row relation).  Rows whose
// slack cannot absorb the initial residual get an artificial column; phase 1
// minimizes the sum of artificials.  The basis inverse is kept as a sparse LU
// factorization (Eigen) plus product-form eta updates, refactorized
// periodically.  Bland's rule replaces Dantzig pricing after a long streak of
// degenerate pivots and is dropped again after real progress, which keeps the
// anti-cycling guarantee without Bland's usual slowdown.
//
// Models that are much taller than they are wide are solved through their
// explicit dual; the primal solution is recovered from the dual multipliers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "quantband/lp.hpp"

namespace quantband::lp {
namespace {

constexpr double kPivotTol = 1e-10;  // reject pivots smaller than this
constexpr double kDropTol = 1e-13;   // eta entries below this are dropped
constexpr double kDegenStep = 1e-12;

enum class IterResult { kOptimal, kUnbounded, kIterLimit, kNumFail };

struct Eta {
  int r;
  double wr;
  std::vector<std::pair<int, double>> off;  // (row, w_i) for i != r
};

class Simplex {
 public:
  Simplex(const LinearProgram& model, const SolveOptions& opt)
      : model_(model), opt_(opt) {
    build();
  }

  Solution run();

 private:
  enum VStat : unsigned char { kBasic, kAtLower, kAtUpper, kNbFree };

  const LinearProgram& model_;
  SolveOptions opt_;

  int m_ = 0;        // rows
  int nstruct_ = 0;  // structural columns
  int nslack_end_ = 0;
  int ncols_ = 0;  // structurals + slacks + artificials
  double sign_ = 1.0;

  std::vector<std::vector<std::pair<int, double>>> scol_;  // structural columns
  std::vector<double> c_, lo_, up_, b_, x_, cost2_;
  std::vector<VStat> stat_;
  std::vector<int> basis_;      // row -> column
  std::vector<int> basis_pos_;  // column -> row or -1
  int n_art_ = 0;
  int phase_ = 1;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  bool lu_ok_ = false;
  std::vector<Eta> etas_;
  std::int64_t iters_ = 0;
  std::int64_t degen_streak_ = 0;
  bool bland_ = false;
  double obj_ = 0.0;           // running phase objective
  std::vector<int> cand_;      // multiple-pricing candidate list
  std::vector<double> rscale_, cscale_;  // equilibration factors
  std::vector<double> colnorm_;          // static pricing weights ~ ||a_j||
  bool perturbed_ = false;  // anti-degeneracy rhs jitter in effect
  int shift_rounds_ = 0;
  std::vector<double> b0_;  // true rhs while perturbed

  void build();
  void init_basis();
  bool refactorize();
  void recompute_basics();
  void ftran(Eigen::VectorXd& v);
  void btran(Eigen::VectorXd& v);
  template <class F>
  void for_col(int j, F&& f) const {
    if (j < nstruct_) {
      for (auto& [r, a] : scol_[j]) f(r, a);
    } else if (j < nslack_end_) {
      f(j - nstruct_, 1.0);
    } else {
      f(art_row_[j - nslack_end_], art_sign_[j - nslack_end_]);
    }
  }
  double dot_col(int j, const Eigen::VectorXd& y) const {
    double d = 0.0;
    for_col(j, [&](int r, double a) { d += a * y[r]; });
    return d;
  }
  double resting_value(int j) const {
    if (stat_[j] == kAtLower) return lo_[j];
    if (stat_[j] == kAtUpper) return up_[j];
    return 0.0;
  }
  IterResult iterate_to_opt(std::int64_t max_iters);
  double current_cost(int j) const { return phase_ == 1 ? (j >= nslack_end_ ? 1.0 : 0.0) : cost2_[j]; }
  void perturb_rhs();
  bool restore_rhs();
  bool drive_out_artificials();
  Solution extract();

  std::vector<int> art_row_;
  std::vector<double> art_sign_;
};

void Simplex::build() {
  m_ = model_.num_rows();
  nstruct_ = model_.num_vars();
  nslack_end_ = nstruct_ + m_;
  ncols_ = nslack_end_;
  sign_ = model_.sense() == Sense::kMinimize ? 1.0 : -1.0;

  scol_.assign(nstruct_, {});
  for (int i = 0; i < m_; ++i)
    for (auto& [j, a] : model_.row(i).terms)
      if (a != 0.0) scol_[j].emplace_back(i, a);

  // Geometric-mean equilibration: coefficients of badly mixed magnitude
  // (product rows easily span 1e-6..1) cause tiny pivots and degenerate
  // crawling otherwise.  Row and column factors are powers-of-two-free
  // geometric midpoints, applied twice.
  rscale_.assign(m_, 1.0);
  cscale_.assign(nstruct_, 1.0);
  if (opt_.scale && m_ > 0 && nstruct_ > 0) {
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> rmin(m_, kInf), rmax(m_, 0.0);
      for (int j = 0; j < nstruct_; ++j)
        for (auto& [r, a] : scol_[j]) {
          const double v = std::abs(a) * rscale_[r] * cscale_[j];
          rmin[r] = std::min(rmin[r], v);
          rmax[r] = std::max(rmax[r], v);
        }
      for (int i = 0; i < m_; ++i)
        if (rmax[i] > 0.0) rscale_[i] /= std::sqrt(rmin[i] * rmax[i]);
      std::vector<double> cmin(nstruct_, kInf), cmax(nstruct_, 0.0);
      for (int j = 0; j < nstruct_; ++j)
        for (auto& [r, a] : scol_[j]) {
          const double v = std::abs(a) * rscale_[r] * cscale_[j];
          cmin[j] = std::min(cmin[j], v);
          cmax[j] = std::max(cmax[j], v);
        }
      for (int j = 0; j < nstruct_; ++j)
        if (cmax[j] > 0.0) cscale_[j] /= std::sqrt(cmin[j] * cmax[j]);
    }
    for (int j = 0; j < nstruct_; ++j)
      for (auto& [r, a] : scol_[j]) a *= rscale_[r] * cscale_[j];
  }

  c_.assign(ncols_, 0.0);
  lo_.resize(ncols_);
  up_.resize(ncols_);
  b_.resize(m_);
  for (int j = 0; j < nstruct_; ++j) {
    c_[j] = sign_ * model_.objective()[j] * cscale_[j];
    lo_[j] = model_.var(j).lower / cscale_[j];
    up_[j] = model_.var(j).upper / cscale_[j];
  }
  for (int i = 0; i < m_; ++i) {
    b_[i] = model_.row(i).rhs * rscale_[i];
    const int s = nstruct_ + i;
    switch (model_.row(i).rel) {
      case Relation::kLe: lo_[s] = 0.0; up_[s] = kInf; break;
      case Relation::kGe: lo_[s] = -kInf; up_[s] = 0.0; break;
      case Relation::kEq: lo_[s] = 0.0; up_[s] = 0.0; break;
    }
  }
  cost2_ = c_;

  // Static steepest-edge surrogate: pricing divides the reduced cost by
  // ~||a_j||, which stops long heavy columns from crowding out cheap pivots
  // (heavy ones also drag dense etas into the basis factor).
  colnorm_.assign(nstruct_, 1.0);
  for (int j = 0; j < nstruct_; ++j) {
    double s2 = 1.0;
    for (auto& [r, a] : scol_[j]) s2 += a * a;
    colnorm_[j] = std::sqrt(s2);
  }
}

void Simplex::init_basis() {
  stat_.assign(ncols_, kAtLower);
  x_.assign(ncols_, 0.0);
  basis_.assign(m_, -1);
  basis_pos_.assign(ncols_, -1);
  for (int j = 0; j < ncols_; ++j) {
    if (lo_[j] > -kInf) {
      stat_[j] = kAtLower;
      x_[j] = lo_[j];
    } else if (up_[j] < kInf) {
      stat_[j] = kAtUpper;
      x_[j] = up_[j];
    } else {
      stat_[j] = kNbFree;
      x_[j] = 0.0;
    }
  }

  // Row activities of the structural part at the resting point.
  std::vector<double> act(m_, 0.0);
  for (int j = 0; j < nstruct_; ++j)
    if (x_[j] != 0.0)
      for (auto& [r, a] : scol_[j]) act[r] += a * x_[j];

  art_row_.clear();
  art_sign_.clear();
  for (int i = 0; i < m_; ++i) {
    const int s = nstruct_ + i;
    const double want = b_[i] - act[i];
    if (want >= lo_[s] - opt_.feas_tol && want <= up_[s] + opt_.feas_tol) {
      basis_[i] = s;
      basis_pos_[s] = i;
      stat_[s] = kBasic;
      x_[s] = want;
    } else {
      // Slack rests at the bound it overshoots; an artificial carries the rest.
      x_[s] = want > up_[s] ? up_[s] : lo_[s];
      stat_[s] = want > up_[s] ? kAtUpper : kAtLower;
      const double res = want - x_[s];
      art_row_.push_back(i);
      art_sign_.push_back(res >= 0 ? 1.0 : -1.0);
      const int a = ncols_ + static_cast<int>(art_row_.size()) - 1;
      basis_[i] = a;
    }
  }
  n_art_ = static_cast<int>(art_row_.size());
  if (n_art_ > 0) {
    const int old = ncols_;
    ncols_ += n_art_;
    c_.resize(ncols_, 0.0);
    cost2_.resize(ncols_, 0.0);
    lo_.resize(ncols_, 0.0);
    up_.resize(ncols_, kInf);
    x_.resize(ncols_, 0.0);
    stat_.resize(ncols_, kBasic);
    basis_pos_.resize(ncols_, -1);
    for (int k = 0; k < n_art_; ++k) basis_pos_[old + k] = -1;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= old) {
        basis_pos_[basis_[i]] = i;
        stat_[basis_[i]] = kBasic;
      }
  }
}

bool Simplex::refactorize() {
  etas_.clear();
  if (m_ == 0) {
    lu_ok_ = false;
    return true;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < m_; ++i) {
    const int j = basis_[i];
    for_col(j, [&](int r, double a) { trip.emplace_back(r, i, a); });
  }
  Eigen::SparseMatrix<double> B(m_, m_);
  B.setFromTriplets(trip.begin(), trip.end());
  B.makeCompressed();
  lu_.compute(B);
  lu_ok_ = lu_.info() == Eigen::Success;
  return lu_ok_;
}

void Simplex::recompute_basics() {
  if (m_ == 0) return;
  Eigen::VectorXd rhs(m_);
  for (int i = 0; i < m_; ++i) rhs[i] = b_[i];
  for (int j = 0; j < ncols_; ++j) {
    if (stat_[j] == kBasic || x_[j] == 0.0) continue;
    for_col(j, [&](int r, double a) { rhs[r] -= a * x_[j]; });
  }
  ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[basis_[i]] = rhs[i];
}

void Simplex::ftran(Eigen::VectorXd& v) {
  if (lu_ok_) v = lu_.solve(v);
  for (const Eta& e : etas_) {
    const double t = v[e.r] / e.wr;
    if (t != 0.0)
      for (auto& [i, wi] : e.off) v[i] -= t * wi;
    v[e.r] = t;
  }
}

void Simplex::btran(Eigen::VectorXd& v) {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double dot = 0.0;
    for (auto& [i, wi] : it->off) dot += wi * v[i];
    v[it->r] = (v[it->r] - dot) / it->wr;
  }
  if (lu_ok_) v = lu_.adjoint().solve(v);
}

void Simplex::perturb_rhs() {
  // Anti-degeneracy jitter: a generic rhs pushes basic values off their
  // bounds, so ratio tests give strictly positive steps and the objective
  // decreases at every pivot, which rules out cycling and bounds the walk
  // across a degenerate face.  Reduced costs never involve b, so once the
  // true rhs is restored the final basis is still dual feasible and
  // certifies in one more pricing pass.
  b0_ = b_;
  const std::uint64_t salt =
      0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(shift_rounds_ + 1);
  for (int i = 0; i < m_; ++i) {
    std::uint64_t z = salt + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(i + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    const double u = 1.0 + static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    b_[i] += 1e-9 * (1.0 + std::abs(b_[i])) * u;  // u in [1,2)
  }
  recompute_basics();
  obj_ = 0.0;
  for (int j = 0; j < ncols_; ++j) obj_ += current_cost(j) * x_[j];
  perturbed_ = true;
  ++shift_rounds_;
  degen_streak_ = 0;
  cand_.clear();
}

bool Simplex::restore_rhs() {
  b_ = b0_;
  if (m_ > 0 && !etas_.empty() && !refactorize()) return false;
  recompute_basics();
  obj_ = 0.0;
  for (int j = 0; j < ncols_; ++j) obj_ += current_cost(j) * x_[j];
  perturbed_ = false;
  degen_streak_ = 0;
  bland_ = false;
  cand_.clear();
  return true;
}

bool Simplex::drive_out_artificials() {
  // A degenerate phase 1 can finish with artificials still basic at level
  // zero.  Pinned to [0,0], each one blocks at step 0 any phase-2 direction
  // that touches its row; with a few thousand of them the iteration freezes
  // on a shelf (the rhs jitter makes it worse, pushing their levels a hair
  // outside [0,0] so every blocking ratio clamps to nothing).  Swap each for
  // a real column with a usable pivot in its row; a row that admits none is
  // linearly dependent and drops out of every later ratio test by itself.
  if (n_art_ == 0 || m_ == 0) return true;
  Eigen::VectorXd rho(m_), w(m_);
  for (int r = 0; r < m_; ++r) {
    const int a = basis_[r];
    if (a < nslack_end_) continue;
    rho.setZero();
    rho[r] = 1.0;
    btran(rho);  // row r of the basis inverse
    int enter = -1;
    double best = 1e-7;
    // Slack pivots are read straight off rho; scan structurals only if no
    // slack in the row is usable (equality rows have fixed slacks).
    for (int j = nstruct_; j < nslack_end_; ++j) {
      if (stat_[j] == kBasic || lo_[j] == up_[j]) continue;
      const double alpha = std::abs(rho[j - nstruct_]);
      if (alpha > best) { best = alpha; enter = j; }
    }
    if (enter < 0) {
      for (int j = 0; j < nstruct_; ++j) {
        if (stat_[j] == kBasic || (lo_[j] == up_[j] && stat_[j] != kNbFree)) continue;
        const double alpha = std::abs(dot_col(j, rho));
        if (alpha > best) { best = alpha; enter = j; }
      }
    }
    if (enter < 0) continue;
    w.setZero();
    for_col(enter, [&](int i, double av) { w[i] = av; });
    ftran(w);
    if (std::abs(w[r]) < 1e-9) continue;
    x_[a] = 0.0;
    stat_[a] = kAtLower;
    basis_pos_[a] = -1;
    stat_[enter] = kBasic;  // keeps its resting value: a zero-step pivot
    basis_[r] = enter;
    basis_pos_[enter] = r;
    Eta e;
    e.r = r;
    e.wr = w[r];
    for (int i = 0; i < m_; ++i)
      if (i != r && std::abs(w[i]) > kDropTol) e.off.emplace_back(i, w[i]);
    etas_.push_back(std::move(e));
    if (static_cast<int>(etas_.size()) >= opt_.refactor_every) {
      if (!refactorize()) return false;
      recompute_basics();
    }
  }
  if (!etas_.empty()) {
    if (!refactorize()) return false;
    recompute_basics();
  }
  return true;
}

IterResult Simplex::iterate_to_opt(std::int64_t max_iters) {
  const std::int64_t bland_after =
      opt_.bland_after > 0 ? opt_.bland_after : 50LL * (m_ + ncols_);
  constexpr std::size_t kCandList = 64;
  Eigen::VectorXd y(m_), w(m_);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(256);

  while (true) {
    if (iters_ >= max_iters) return IterResult::kIterLimit;

    // y = B^-T c_B, then reduced costs d_j = c_j - y . a_j.
    for (int i = 0; i < m_; ++i) y[i] = current_cost(basis_[i]);
    btran(y);

    int enter = -1;
    double best = 0.0;
    int enter_dir = +1;
    auto price = [&](int j, double& viol, int& dir) {
      if (stat_[j] == kBasic) return false;
      if (lo_[j] == up_[j] && stat_[j] != kNbFree) return false;  // fixed
      const double d = current_cost(j) - dot_col(j, y);
      viol = 0.0;
      dir = +1;
      if (stat_[j] == kAtLower) {
        if (d < -opt_.opt_tol) { viol = -d; dir = +1; }
      } else if (stat_[j] == kAtUpper) {
        if (d > opt_.opt_tol) { viol = d; dir = -1; }
      } else {  // free at zero
        if (d < -opt_.opt_tol) { viol = -d; dir = +1; }
        else if (d > opt_.opt_tol) { viol = d; dir = -1; }
      }
      return viol > 0.0;
    };
    if (bland_) {
      // Lowest eligible index; eligibility, not size, drives the choice.
      for (int j = 0; j < ncols_; ++j) {
        double viol;
        int dir;
        if (price(j, viol, dir)) { enter = j; enter_dir = dir; break; }
      }
    } else {
      // Multiple pricing: keep a short list of attractive columns, re-price
      // only those against the current y, and refill with a full sweep when
      // the list runs dry.  Only the full sweep, finding nothing, certifies
      // optimality.
      const auto weight = [&](int j) { return j < nstruct_ ? colnorm_[j] : 1.0; };
      for (std::size_t k = 0; k < cand_.size();) {
        double viol;
        int dir;
        if (!price(cand_[k], viol, dir)) {
          cand_[k] = cand_.back();
          cand_.pop_back();
          continue;
        }
        const double score = viol / weight(cand_[k]);
        if (score > best) { best = score; enter = cand_[k]; enter_dir = dir; }
        ++k;
      }
      if (enter < 0) {
        scored.clear();
        for (int j = 0; j < ncols_; ++j) {
          double viol;
          int dir;
          if (price(j, viol, dir)) scored.emplace_back(viol / weight(j), j);
        }
        if (!scored.empty()) {
          const std::size_t keep = std::min<std::size_t>(kCandList, scored.size());
          std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                            [](const auto& a, const auto& b) { return a.first > b.first; });
          cand_.clear();
          for (std::size_t k = 0; k < keep; ++k) cand_.push_back(scored[k].second);
          double viol;
          int dir;
          price(cand_[0], viol, dir);
          best = scored[0].first;
          enter = cand_[0];
          enter_dir = dir;
        }
      }
    }
    if (enter < 0) return IterResult::kOptimal;

    const double d_enter = current_cost(enter) - dot_col(enter, y);
    w.setZero();
    for_col(enter, [&](int r, double a) { w[r] = a; });
    ftran(w);

    // Two-pass ratio test.  Pass 1 finds the largest step that keeps every
    // basic variable inside its bounds relaxed by a small working tolerance;
    // pass 2 picks, among the rows whose exact ratio fits under that step,
    // the one with the largest pivot.  A degenerate row then admits a small
    // but strictly positive step (paid for by a bounded, tolerance-sized
    // overshoot) instead of blocking at zero, and the chosen pivot stays
    // away from the tiny elements that rot the factorization.
    double t_range = up_[enter] - lo_[enter];  // may be inf
    if (stat_[enter] == kNbFree) t_range = kInf;
    const double relax = bland_ ? 0.0 : 10.0 * opt_.feas_tol;
    double t_lim = t_range;
    for (int i = 0; i < m_; ++i) {
      const double wi = w[i];
      if (std::abs(wi) <= kPivotTol) continue;
      const double g = -enter_dir * wi;
      const int bj = basis_[i];
      double ti;
      if (g > 0) {
        if (up_[bj] >= kInf) continue;
        ti = (up_[bj] + relax - x_[bj]) / g;
      } else {
        if (lo_[bj] <= -kInf) continue;
        ti = (lo_[bj] - relax - x_[bj]) / g;
      }
      if (ti < t_lim) t_lim = std::max(ti, 0.0);
    }
    int leave_pos = -1;  // -1 means bound flip
    bool leave_at_upper = false;
    double leave_piv = 0.0;
    double t_exact = t_range;
    for (int i = 0; i < m_; ++i) {
      const double wi = w[i];
      if (std::abs(wi) <= kPivotTol) continue;
      const double g = -enter_dir * wi;
      const int bj = basis_[i];
      double ti;
      bool at_up;
      if (g > 0) {
        if (up_[bj] >= kInf) continue;
        ti = (up_[bj] - x_[bj]) / g;
        at_up = true;
      } else {
        if (lo_[bj] <= -kInf) continue;
        ti = (lo_[bj] - x_[bj]) / g;
        at_up = false;
      }
      if (ti < 0.0) ti = 0.0;  // overshoot from an earlier relaxed step
      if (ti > t_lim) continue;
      const bool better =
          bland_ ? (leave_pos < 0 || basis_[i] < basis_[leave_pos])
                 : (leave_pos < 0 || std::abs(wi) > std::abs(leave_piv));
      if (better) {
        t_exact = ti;
        leave_pos = i;
        leave_at_upper = at_up;
        leave_piv = wi;
      }
    }
    if (leave_pos < 0 && !(t_range < kInf)) {
      if (!etas_.empty()) {
        // Possibly a noise ray from eta drift: re-derive the basis exactly
        // and price again; only a fresh factorization may certify a ray.
        if (!refactorize()) return IterResult::kNumFail;
        recompute_basics();
        cand_.clear();
        continue;
      }
      if (phase_ == 1) {
        // The phase-1 objective is bounded below, so a descent ray here is
        // impossible; at noise scale accept the point (the artificial
        // residual check downstream still decides feasibility).
        if (std::abs(d_enter) <= 1e-6) return IterResult::kOptimal;
        return IterResult::kNumFail;
      }
      return IterResult::kUnbounded;
    }

    ++iters_;
    double step;
    if (leave_pos < 0 || t_range <= t_min) {
      // Bound flip: the entering variable crosses to its other bound.
      step = t_range;
      for (int i = 0; i < m_; ++i)
        if (w[i] != 0.0) x_[basis_[i]] -= enter_dir * step * w[i];
      x_[enter] = stat_[enter] == kAtLower ? up_[enter] : lo_[enter];
      stat_[enter] = stat_[enter] == kAtLower ? kAtUpper : kAtLower;
    } else {
      step = t_min;
      if (std::abs(leave_piv) < kPivotTol) return IterResult::kNumFail;
      for (int i = 0; i < m_; ++i)
        if (w[i] != 0.0) x_[basis_[i]] -= enter_dir * step * w[i];
      const int leaving = basis_[leave_pos];
      x_[leaving] = leave_at_upper ? up_[leaving] : lo_[leaving];
      stat_[leaving] = leave_at_upper ? kAtUpper : kAtLower;
      basis_pos_[leaving] = -1;
      x_[enter] = resting_value(enter) + enter_dir * step;
      stat_[enter] = kBasic;
      basis_[leave_pos] = enter;
      basis_pos_[enter] = leave_pos;

      Eta e;
      e.r = leave_pos;
      e.wr = w[leave_pos];
      for (int i = 0; i < m_; ++i)
        if (i != leave_pos && std::abs(w[i]) > kDropTol) e.off.emplace_back(i, w[i]);
      etas_.push_back(std::move(e));
    }

    const double delta = step * std::abs(d_enter);
    obj_ -= delta;
    if (step <= kDegenStep) {
      ++degen_streak_;
      if (!perturbed_ && opt_.perturb_after > 0 &&
          degen_streak_ >= opt_.perturb_after && shift_rounds_ < 5) {
        perturb_rhs();
      } else if (degen_streak_ >= bland_after) {
        bland_ = true;
      }
    } else if (delta > 1e-12 * (1.0 + std::abs(obj_))) {
      degen_streak_ = 0;
      bland_ = false;
    }

    if (static_cast<int>(etas_.size()) >= opt_.refactor_every) {
      if (!refactorize()) return IterResult::kNumFail;
      recompute_basics();
    }
  }
}

Solution Simplex::extract() {
  Solution sol;
  sol.iterations = iters_;
  sol.x.resize(nstruct_);
  for (int j = 0; j < nstruct_; ++j) sol.x[j] = x_[j] * cscale_[j];
  double obj = model_.objective_offset();
  for (int j = 0; j < nstruct_; ++j) obj += model_.objective()[j] * sol.x[j];
  sol.objective = obj;

  Eigen::VectorXd y(std::max(m_, 1));
  if (m_ > 0) {
    for (int i = 0; i < m_; ++i) y[i] = cost2_[basis_[i]];
    btran(y);
  }
  sol.duals.resize(m_);
  for (int i = 0; i < m_; ++i) sol.duals[i] = sign_ * y[i] * rscale_[i];
  sol.reduced_costs.resize(nstruct_);
  double dual_obj = 0.0;
  for (int i = 0; i < m_; ++i) dual_obj += y[i] * b_[i];
  for (int j = 0; j < nstruct_; ++j) {
    const double rcv = cost2_[j] - (m_ > 0 ? dot_col(j, y) : 0.0);
    sol.reduced_costs[j] = sign_ * rcv / cscale_[j];
    if (stat_[j] == kBasic) continue;
    if (rcv > 0 && lo_[j] > -kInf) dual_obj += rcv * lo_[j];
    else if (rcv < 0 && up_[j] < kInf) dual_obj += rcv * up_[j];
  }
  sol.dual_objective = sign_ * dual_obj + model_.objective_offset();
  return sol;
}

Solution Simplex::run() {
  Solution sol;
  init_basis();
  if (!refactorize() && m_ > 0) {
    // Slack/artificial start is triangular; failure here means bad input.
    sol.status = Status::kStalled;
    sol.note = "initial factorization failed";
    return sol;
  }
  recompute_basics();

  const std::int64_t max_iters =
      opt_.max_iters > 0 ? opt_.max_iters : 100LL * (m_ + ncols_) + 10000;

  double bscale = 1.0;
  for (int i = 0; i < m_; ++i) bscale = std::max(bscale, std::abs(b_[i]));

  if (n_art_ > 0) {
    phase_ = 1;
    obj_ = 0.0;
    for (int k = 0; k < n_art_; ++k) obj_ += x_[nslack_end_ + k];
    IterResult r = iterate_to_opt(max_iters);
    if (r == IterResult::kNumFail || r == IterResult::kIterLimit) {
      sol.status = Status::kStalled;
      sol.iterations = iters_;
      sol.note = r == IterResult::kIterLimit ? "iteration limit in phase 1" : "numerical failure in phase 1";
      return sol;
    }
    double infeas = 0.0;
    for (int k = 0; k < n_art_; ++k) infeas += std::abs(x_[nslack_end_ + k]);
    if (infeas > 1e-7 * bscale) {
      sol.status = Status::kInfeasible;
      sol.iterations = iters_;
      sol.note = "phase-1 infeasibility " + std::to_string(infeas);
      return sol;
    }
    for (int k = 0; k < n_art_; ++k) {
      const int a = nslack_end_ + k;
      lo_[a] = up_[a] = 0.0;
      if (stat_[a] != kBasic) x_[a] = 0.0;
    }
    if (!drive_out_artificials()) {
      sol.status = Status::kStalled;
      sol.iterations = iters_;
      sol.note = "basis repair failed after phase 1";
      return sol;
    }
  }

  phase_ = 2;
  obj_ = 0.0;
  for (int j = 0; j < ncols_; ++j) obj_ += cost2_[j] * x_[j];
  degen_streak_ = 0;
  bland_ = false;
  cand_.clear();  // phase-1 prices are meaningless under the real costs
  IterResult r = iterate_to_opt(max_iters);
  if (r == IterResult::kNumFail) {
    // One repair attempt from a fresh factorization.
    if (refactorize()) {
      recompute_basics();
      r = iterate_to_opt(max_iters);
    }
  }
  switch (r) {
    case IterResult::kOptimal: break;
    case IterResult::kUnbounded: {
      sol.status = Status::kUnbounded;
      sol.iterations = iters_;
      return sol;
    }
    default: {
      sol.status = Status::kStalled;
      sol.iterations = iters_;
      sol.note = r == IterResult::kIterLimit ? "iteration limit" : "numerical failure";
      return sol;
    }
  }

  // Clean residuals before reporting.
  if (m_ > 0 && !etas_.empty()) {
    if (refactorize()) recompute_basics();
  }
  sol = extract();
  sol.status = Status::kOptimal;
  sol.iterations = iters_;
  return sol;
}

// ---------------------------------------------------------------------------
// Explicit dualization for very tall models.

LinearProgram build_dual(const LinearProgram& p, std::vector<int>& y_col,
                         std::vector<int>& rp_col, std::vector<int>& rn_col) {
  // Dual of min c.x, a_i.x rel b_i, l <= x <= u:
  //   max b.y + l.rp + u.rn
  //   s.t. for every x_j:  sum_i a_ij y_i + rp_j + rn_j = c_j
  // with y_i >= 0 for >= rows, <= 0 for <= rows, free for = rows,
  // rp_j >= 0 present when l_j finite, rn_j <= 0 present when u_j finite.
  LinearProgram d;
  d.set_sense(Sense::kMaximize);
  d.set_objective_offset(p.objective_offset());
  y_col.assign(p.num_rows(), -1);
  rp_col.assign(p.num_vars(), -1);
  rn_col.assign(p.num_vars(), -1);
  for (int i = 0; i < p.num_rows(); ++i) {
    const Constraint& r = p.row(i);
    double lo = -kInf, hi = kInf;
    if (r.rel == Relation::kGe) lo = 0.0;
    if (r.rel == Relation::kLe) hi = 0.0;
    y_col[i] = d.add_variable("y" + std::to_string(i), lo, hi);
    d.set_objective(y_col[i], r.rhs);
  }
  for (int j = 0; j < p.num_vars(); ++j) {
    const Variable& v = p.var(j);
    if (v.lower > -kInf) {
      rp_col[j] = d.add_variable("rp" + std::to_string(j), 0.0, kInf);
      d.set_objective(rp_col[j], v.lower);
    }
    if (v.upper < kInf) {
      rn_col[j] = d.add_variable("rn" + std::to_string(j), -kInf, 0.0);
      d.set_objective(rn_col[j], v.upper);
    }
  }
  std::vector<std::vector<std::pair<int, double>>> byvar(p.num_vars());
  for (int i = 0; i < p.num_rows(); ++i)
    for (auto& [j, a] : p.row(i).terms)
      if (a != 0.0) byvar[j].emplace_back(y_col[i], a);
  for (int j = 0; j < p.num_vars(); ++j) {
    auto terms = std::move(byvar[j]);
    if (rp_col[j] >= 0) terms.emplace_back(rp_col[j], 1.0);
    if (rn_col[j] >= 0) terms.emplace_back(rn_col[j], 1.0);
    d.add_constraint(std::move(terms), Relation::kEq, p.objective()[j]);
  }
  return d;
}

Solution solve_via_dual(const LinearProgram& p, const SolveOptions& opt) {
  // Assumes p minimizes.
  std::vector<int> y_col, rp_col, rn_col;
  LinearProgram d = build_dual(p, y_col, rp_col, rn_col);
  SolveOptions dopt = opt;
  dopt.allow_dualize = false;
  Solution ds = Simplex(d, dopt).run();
  Solution sol;
  sol.iterations = ds.iterations;
  if (ds.status == Status::kUnbounded) {
    sol.status = Status::kInfeasible;
    sol.note = "dual unbounded";
    return sol;
  }
  if (ds.status != Status::kOptimal) {
    sol.status = Status::kStalled;  // caller falls back to the direct solve
    sol.note = "dual solve: " + std::string(to_string(ds.status));
    return sol;
  }
  sol.status = Status::kOptimal;
  sol.objective = ds.objective;
  sol.dual_objective = ds.dual_objective;
  sol.x.resize(p.num_vars());
  for (int j = 0; j < p.num_vars(); ++j) sol.x[j] = ds.duals[j];
  sol.duals.resize(p.num_rows());
  for (int i = 0; i < p.num_rows(); ++i) sol.duals[i] = ds.x[y_col[i]];
  sol.reduced_costs.assign(p.num_vars(), 0.0);
  for (int j = 0; j < p.num_vars(); ++j) {
    double rc = 0.0;
    if (rp_col[j] >= 0) rc += ds.x[rp_col[j]];
    if (rn_col[j] >= 0) rc += ds.x[rn_col[j]];
    sol.reduced_costs[j] = rc;
  }
  return sol;
}

double max_violation(const LinearProgram& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) {
    worst = std::max(worst, p.var(j).lower - x[j]);
    worst = std::max(worst, x[j] - p.var(j).upper);
  }
  for (int i = 0; i < p.num_rows(); ++i) {
    double act = 0.0;
    for (auto& [j, a] : p.row(i).terms) act += a * x[j];
    const Constraint& r = p.row(i);
    if (r.rel != Relation::kGe) worst = std::max(worst, act - r.rhs);
    if (r.rel != Relation::kLe) worst = std::max(worst, r.rhs - act);
  }
  return worst;
}

}  // namespace

Solution solve_lp(const LinearProgram& model, const SolveOptions& opt) {
  if (model.num_binaries() > 0)
    throw std::invalid_argument("solve_lp: model has binary variables, use solve_mip");
  for (int j = 0; j < model.num_vars(); ++j) {
    const Variable& v = model.var(j);
    if (v.lower > v.upper + 1e-12) {
      Solution s;
      s.status = Status::kInfeasible;
      s.note = "empty bound interval on " + v.name;
      return s;
    }
  }

  const bool tall = opt.allow_dualize &&
                    model.num_rows() > opt.dualize_ratio * model.num_vars() &&
                    model.num_rows() >= opt.dualize_min_rows;
  if (tall && model.sense() == Sense::kMinimize) {
    Solution s = solve_via_dual(model, opt);
    if (s.status == Status::kOptimal) {
      const double scale = 1.0 + std::abs(s.objective);
      if (max_violation(model, s.x) <= 1e-6 * scale) return s;
    } else if (s.status == Status::kInfeasible) {
      return s;
    }
    // Fall through to the direct solve on any doubt.
  }
  return Simplex(model, opt).run();
}

}  // namespace quantband::lp
