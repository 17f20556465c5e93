#include "quantband/lp.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace quantband::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kStalled: return "stalled";
  }
  return "?";
}

int LinearProgram::add_variable(std::string name, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper))
    throw std::invalid_argument("variable bound is NaN: " + name);
  vars_.push_back(Variable{std::move(name), lower, upper, false});
  obj_.push_back(0.0);
  return num_vars() - 1;
}

int LinearProgram::add_binary(std::string name) {
  const int id = add_variable(std::move(name), 0.0, 1.0);
  vars_[id].binary = true;
  return id;
}

void LinearProgram::set_objective(int var, double coeff) {
  if (!std::isfinite(coeff)) throw std::invalid_argument("objective coefficient not finite");
  obj_.at(var) = coeff;
}

int LinearProgram::add_constraint(std::vector<std::pair<int, double>> terms,
                                  Relation rel, double rhs, std::string name) {
  if (!std::isfinite(rhs)) throw std::invalid_argument("constraint rhs not finite");
  for (auto& [j, a] : terms) {
    if (j < 0 || j >= num_vars()) throw std::invalid_argument("constraint references unknown variable");
    if (!std::isfinite(a)) throw std::invalid_argument("constraint coefficient not finite");
  }
  rows_.push_back(Constraint{std::move(name), std::move(terms), rel, rhs});
  return num_rows() - 1;
}

void LinearProgram::dump(std::ostream& os) const {
  os << (sense_ == Sense::kMinimize ? "min" : "max");
  bool first = true;
  for (int j = 0; j < num_vars(); ++j) {
    if (obj_[j] == 0.0) continue;
    os << (first ? " " : " + ") << obj_[j] << "*" << vars_[j].name;
    first = false;
  }
  if (obj_offset_ != 0.0) os << " + " << obj_offset_;
  os << "\n";
  for (const Constraint& r : rows_) {
    if (!r.name.empty()) os << r.name << ": ";
    bool f = true;
    for (auto& [j, a] : r.terms) {
      os << (f ? "" : " + ") << a << "*" << vars_[j].name;
      f = false;
    }
    if (f) os << "0";
    os << (r.rel == Relation::kLe ? " <= " : r.rel == Relation::kEq ? " = " : " >= ");
    os << r.rhs << "\n";
  }
  for (const Variable& v : vars_) {
    os << v.lower << " <= " << v.name << " <= " << v.upper;
    if (v.binary) os << " (binary)";
    os << "\n";
  }
}

}  // namespace quantband::lp
