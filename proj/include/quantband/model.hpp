#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quantband/lp.hpp"
#include "quantband/prob.hpp"

namespace quantband {

// Polyhedron of joint decisions and per-scenario losses,
//   { (x, T) : A x + B T <= c },  x in R^k, T in R^n.
// A row may involve only x, only T, or both; variable bounds are expressed as
// rows too.  Optional per-loss box bounds are metadata used to bound auxiliary
// variables (they are applied as variable bounds when the set is embedded into
// a linear program, never as extra rows).
//
// Construction verifies non-emptiness with a feasibility LP and throws
// std::invalid_argument otherwise.  Instances are immutable after
// construction and safe to share across threads.
class FeasibleSet {
 public:
  FeasibleSet(std::vector<std::vector<double>> a,
              std::vector<std::vector<double>> b, std::vector<double> c,
              std::vector<std::string> x_names = {},
              std::vector<std::string> t_names = {},
              std::optional<std::vector<double>> t_lower = std::nullopt,
              std::optional<std::vector<double>> t_upper = std::nullopt);

  int dim_x() const noexcept { return k_; }
  int num_scenarios() const noexcept { return n_; }
  int num_rows() const noexcept { return l_; }

  const std::vector<std::vector<double>>& a() const noexcept { return a_; }
  const std::vector<std::vector<double>>& b() const noexcept { return b_; }
  const std::vector<double>& c() const noexcept { return c_; }
  const std::string& x_name(int j) const { return x_names_[j]; }
  const std::string& t_name(int i) const { return t_names_[i]; }

  bool has_t_bounds() const noexcept { return t_lower_.has_value(); }
  double t_lower(int i) const;  // -inf when no metadata
  double t_upper(int i) const;  // +inf when no metadata

  // Column offsets of the embedded variables inside a host LP.
  struct Offsets {
    int x0 = 0;
    int t0 = 0;
  };

  // Appends the k x-columns, the n T-columns and all l rows to `m`.
  // T columns carry the metadata bounds when present, otherwise both
  // variable kinds are free (the rows are the only restriction).
  Offsets append_to(lp::LinearProgram& m) const;

  // Componentwise bounds of T over the set via 2n box LPs; metadata bounds,
  // when present, are returned directly.  Infinite entries mean the set does
  // not bound that coordinate.
  struct TBox {
    std::vector<double> lower;
    std::vector<double> upper;
  };
  TBox t_box() const;

 private:
  int k_, n_, l_;
  std::vector<std::vector<double>> a_, b_;
  std::vector<double> c_;
  std::vector<std::string> x_names_, t_names_;
  std::optional<std::vector<double>> t_lower_, t_upper_;
};

// Minimization of the band expectation of the loss vector over a feasible
// set: with band (alpha, gamma] the objective for a point
// psi = (x, T, s, theta, w') is
//   ( (1-alpha) s + sum_i theta_i - sum_i T_i p_i w'_i ) / (gamma - alpha)
// minimized subject to (x,T) in the set, theta_i + s p_i >= T_i p_i,
// theta >= 0, and w' in { [0,1]^n : sum_i w'_i p_i = 1 - gamma }.
// The T.w' product makes the program bilinear.
class BilinearProgram {
 public:
  BilinearProgram(FeasibleSet fs, std::vector<double> probs, Prob alpha,
                  Prob gamma);

  const FeasibleSet& set() const noexcept { return fs_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  double width() const noexcept { return gamma_ - alpha_; }

 private:
  FeasibleSet fs_;
  std::vector<double> probs_;
  double alpha_, gamma_;
};

// A candidate point of the bilinear program; no feasibility is implied.
struct BilinearPoint {
  std::vector<double> x;
  std::vector<double> t;
  double s = 0.0;
  std::vector<double> theta;
  std::vector<double> wprime;
};

// Objective value at psi; pure arithmetic, throws on dimension mismatch.
double evaluate_objective(const BilinearProgram& bp, const BilinearPoint& psi);

// Exact optimum by enumerating the vertices of the w' polytope (each vertex
// has at most one fractional coordinate) and solving the remaining LP in
// (x, T, s, theta) per vertex.  Requires num_scenarios() <= 14.
double solve_exact_small(const BilinearProgram& bp);

// Loss-quantile minimization as a big-M integer program:
//   min kappa  s.t.  sum_i z_i p_i >= gamma,  T_i <= kappa + M_i (1 - z_i),
//                    (x, T) feasible, z binary.
// Column layout: [ x | T | kappa | z ].
struct VarIpModel {
  lp::LinearProgram lp;
  int x0 = 0, t0 = 0, kappa = 0, z0 = 0;
};

// big_m: scalar M for every scenario; when absent M_i is derived from the
// loss box as upper(T_i) - min_j lower(T_j) (requires a bounded box).
// relax=true keeps z continuous in [0,1], giving a lower bound on the
// integer optimum.
VarIpModel build_var_ip(const FeasibleSet& fs, const std::vector<double>& probs,
                        Prob gamma, std::optional<double> big_m, bool relax);

lp::Solution var_ip(const FeasibleSet& fs, const std::vector<double>& probs,
                    Prob gamma, std::optional<double> big_m = std::nullopt,
                    bool relax = false);

// Shared validation: positive entries summing to 1 within 1e-9.
void check_probs(const std::vector<double>& probs);

namespace detail {

// LP over (x, T, s, theta) with w' held fixed:
//   min ( (1-alpha) s + sum theta_i - sum T_i p_i w'_i ) / denom
//   s.t. (x,T) in the set, theta_i + s p_i - T_i p_i >= 0, theta >= 0.
// denom is gamma - alpha, except for the all-zero w' which stands for the
// full band (alpha, 1] and is scaled by 1 - alpha; the minimizer is the same
// either way (positive rescaling) but the reported value then equals the
// upper-tail average.  The tail rows start at tail_row0 in declaration
// order; their duals times denom give the inner mass allocation w.
struct FixedWModel {
  lp::LinearProgram lp;
  FeasibleSet::Offsets off;
  int s_col = 0;
  int theta0 = 0;
  int tail_row0 = 0;
  double denom = 0.0;
};

FixedWModel build_fixed_w_lp(const BilinearProgram& bp,
                             const std::vector<double>& wprime);

}  // namespace detail

}  // namespace quantband
