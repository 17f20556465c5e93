#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace quantband::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { kMinimize, kMaximize };
enum class Relation { kLe, kEq, kGe };
enum class Status { kOptimal, kInfeasible, kUnbounded, kStalled };

const char* to_string(Status s);

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  bool binary = false;
};

struct Constraint {
  std::string name;
  // Sparse row: (variable index, coefficient), unique indices.
  std::vector<std::pair<int, double>> terms;
  Relation rel = Relation::kLe;
  double rhs = 0.0;
};

// In-memory LP/MIP model.  Rows and columns are addressed by the integer ids
// returned from the add_* calls.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower = 0.0, double upper = kInf);
  int add_binary(std::string name);

  void set_sense(Sense s) { sense_ = s; }
  void set_objective_offset(double v) { obj_offset_ = v; }
  void set_objective(int var, double coeff);

  int add_constraint(std::vector<std::pair<int, double>> terms, Relation rel,
                     double rhs, std::string name = {});

  int num_vars() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const {
    int n = 0;
    for (const auto& v : vars_) n += v.binary ? 1 : 0;
    return n;
  }
  Sense sense() const { return sense_; }
  double objective_offset() const { return obj_offset_; }
  const std::vector<double>& objective() const { return obj_; }
  const Variable& var(int j) const { return vars_[j]; }
  Variable& var(int j) { return vars_[j]; }
  const Constraint& row(int i) const { return rows_[i]; }
  const std::vector<Variable>& vars() const { return vars_; }
  const std::vector<Constraint>& rows() const { return rows_; }

  // Plain-text algebraic dump, one constraint per line.
  void dump(std::ostream& os) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> obj_;
  double obj_offset_ = 0.0;
  Sense sense_ = Sense::kMinimize;
};

struct SolveOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  // 0 = automatic (100 * (rows + cols) + 10000).
  std::int64_t max_iters = 0;
  // Degenerate-pivot streak after which Bland's rule kicks in; 0 = 50*(m+n).
  std::int64_t bland_after = 0;
  int refactor_every = 100;
  // Geometric-mean equilibration of the constraint matrix.  Off by default:
  // it reshuffles pivot choices enough to hurt the large generated models
  // this library cares about, but it can rescue externally supplied models
  // with wild coefficient ranges.
  bool scale = false;
  // Solve the explicit dual instead when the model is much taller than wide.
  bool allow_dualize = true;
  int dualize_min_rows = 2000;
  int dualize_ratio = 4;  // rows must exceed ratio * cols as well
};

struct MipOptions {
  SolveOptions lp;
  double int_tol = 1e-6;
  // Node bound must beat the incumbent by more than this to stay open.
  double prune_tol = 1e-9;
};

struct Solution {
  Status status = Status::kStalled;
  double objective = 0.0;
  std::vector<double> x;              // per variable
  std::vector<double> duals;          // per row, shadow-price sign convention
  std::vector<double> reduced_costs;  // per variable
  std::int64_t iterations = 0;
  std::int64_t nodes = 0;  // branch-and-bound nodes (LP solves report 0)
  std::string note;

  // b'y plus active-bound contributions; equals `objective` at an optimum.
  double dual_objective = 0.0;
};

// Two-phase bounded-variable revised simplex.  Rejects models with binary
// variables.  Duals follow the shadow-price convention: the dual of row i is
// d(objective)/d(rhs_i) for the model's own sense, so for a minimization a
// binding >= row has a nonnegative dual and a binding <= row a nonpositive
// one.
Solution solve_lp(const LinearProgram& lp, const SolveOptions& opt = {});

// Best-bound branch and bound over the binary variables; branches on the most
// fractional binary.  Depth is capped at 10 * (number of binaries).
Solution solve_mip(const LinearProgram& lp, const MipOptions& opt = {});

}  // namespace quantband::lp
