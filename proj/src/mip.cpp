// Branch and bound over binary variables.  Nodes are explored best bound
// first; branching picks the most fractional binary.  Every node re-solves
// its LP relaxation from scratch.

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "quantband/lp.hpp"

namespace quantband::lp {
namespace {

struct Node {
  std::vector<std::pair<int, int>> fixes;  // (binary var, 0/1)
  double bound;
  int depth;
  std::int64_t seq;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // smaller bound first
    return a.seq > b.seq;
  }
};

}  // namespace

Solution solve_mip(const LinearProgram& model, const MipOptions& opt) {
  std::vector<int> bins;
  for (int j = 0; j < model.num_vars(); ++j)
    if (model.var(j).binary) bins.push_back(j);
  const bool minimize = model.sense() == Sense::kMinimize;

  // Work on a relaxed copy; binaries become [0,1] continuous and get fixed
  // per node through their bounds.
  LinearProgram relax = model;
  for (int j : bins) {
    relax.var(j).binary = false;
    relax.var(j).lower = 0.0;
    relax.var(j).upper = 1.0;
  }
  // Internally treat everything as minimization of the model's sense value.
  const double dirsign = minimize ? 1.0 : -1.0;

  const int depth_cap = 10 * std::max<int>(1, static_cast<int>(bins.size()));
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t seq = 0;
  open.push(Node{{}, -kInf, 0, seq++});

  Solution best;
  best.status = Status::kInfeasible;
  bool have_incumbent = false;
  double incumbent = kInf;
  std::int64_t nodes = 0;
  std::int64_t iterations = 0;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound >= incumbent - opt.prune_tol) continue;
    if (node.depth > depth_cap)
      throw std::runtime_error("solve_mip: branch depth cap exceeded");

    for (int j : bins) {
      relax.var(j).lower = 0.0;
      relax.var(j).upper = 1.0;
    }
    for (auto [j, v] : node.fixes) {
      relax.var(j).lower = v;
      relax.var(j).upper = v;
    }
    ++nodes;
    Solution s = solve_lp(relax, opt.lp);
    iterations += s.iterations;
    if (s.status == Status::kInfeasible) continue;
    if (s.status == Status::kUnbounded) {
      int free_bin = -1;
      for (int j : bins) {
        bool fixed = false;
        for (auto [fj, fv] : node.fixes) fixed = fixed || fj == j;
        if (!fixed) { free_bin = j; break; }
      }
      if (free_bin < 0) {
        s.nodes = nodes;
        return s;  // an integral completion is unbounded
      }
      for (int v : {0, 1}) {
        Node child;
        child.fixes = node.fixes;
        child.fixes.emplace_back(free_bin, v);
        child.bound = -kInf;
        child.depth = node.depth + 1;
        child.seq = seq++;
        open.push(child);
      }
      continue;
    }
    if (s.status != Status::kOptimal)
      throw std::runtime_error("solve_mip: node LP " + std::string(to_string(s.status)));

    const double val = dirsign * s.objective;
    if (have_incumbent && val >= incumbent - opt.prune_tol) continue;

    int branch = -1;
    double most_frac = opt.int_tol;
    for (int j : bins) {
      const double f = std::min(s.x[j], 1.0 - s.x[j]);
      if (f > most_frac) {
        most_frac = f;
        branch = j;
      }
    }
    if (branch < 0) {
      // Integral: new incumbent.  Snap the binaries before reporting.
      incumbent = val;
      have_incumbent = true;
      best = s;
      for (int j : bins) best.x[j] = std::round(best.x[j]);
      continue;
    }
    for (int v : {0, 1}) {
      Node child;
      child.fixes = node.fixes;
      child.fixes.emplace_back(branch, v);
      child.bound = val;
      child.depth = node.depth + 1;
      child.seq = seq++;
      open.push(child);
    }
  }

  best.nodes = nodes;
  best.iterations = iterations;
  if (!have_incumbent) best.status = Status::kInfeasible;
  return best;
}

}  // namespace quantband::lp
