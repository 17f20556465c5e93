#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quantband/estimators.hpp"
#include "quantband/model.hpp"

namespace quantband::te {

// Undirected capacitated link; fail_prob is per-scenario-draw and may be
// absent until sampled.
struct Edge {
  std::string u, v;
  double capacity = 0.0;
  std::optional<double> fail_prob;
};

struct Topology {
  std::string name;
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
};

// Rejects duplicate nodes/edges, self loops, unknown endpoints, non-positive
// capacities and out-of-range failure probabilities.
void validate_topology(const Topology& t);

struct Demand {
  std::string src, dst;
  double demand = 0.0;
};

struct DemandMatrix {
  std::vector<Demand> entries;
};

struct PairTunnels {
  std::string src, dst;
  std::vector<std::vector<std::string>> paths;  // node sequences src..dst
};

struct TunnelSet {
  std::vector<PairTunnels> pairs;
  std::vector<std::string> warnings;  // pairs that got fewer than two tunnels
};

struct Scenario {
  std::vector<int> failed;  // edge indices, ascending
  double prob = 0.0;
};

// What to do with the probability mass of the scenarios that were cut off:
// spread it over the kept ones, or assign it to one synthetic all-links-down
// scenario (whose loss is forced to 1).
enum class ScenarioMode { kNormalize, kResidual };

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  ScenarioMode mode = ScenarioMode::kNormalize;
  double raw_mass = 0.0;  // total probability kept before normalization
};

// Recursively removes degree <= 1 vertices (pendants, then anything the
// removal isolates).  Throws when the result is empty or disconnected.
Topology prune_topology(const Topology& t);

// All unordered node pairs of the topology, each as (smaller, larger) name,
// sorted; the demand/tunnel universe of the case study.
std::vector<std::pair<std::string, std::string>> all_pairs(const Topology& t);

// Two tunnels per pair: the shortest path (breadth-first, lexicographic
// tie-break on node names), then the shortest path in the graph without the
// first path's edges; when that graph disconnects the pair, the
// second-shortest simple path overall.  Pairs with a single simple path get
// one tunnel and a warning.
TunnelSet gen_tunnels(const Topology& t,
                      const std::vector<std::pair<std::string, std::string>>& pairs);

// Gravity demands d ~ w_src * w_dst with w_v the capacity adjacent to v,
// scaled uniformly so that routing every demand on its shortest path gives a
// maximum link utilization of target_mlu.  Deterministic; the seed is only
// echoed into report metadata.
DemandMatrix gen_demands_gravity(const Topology& t, double target_mlu,
                                 std::uint64_t seed);

// Maximum link utilization of shortest-path routing for the given demands.
double shortest_path_mlu(const Topology& t, const DemandMatrix& d);

// Draws an independent failure probability per edge from a Weibull
// distribution with shape 0.8 and scale 0.001/(ln 2)^(1/0.8), whose median
// is exactly 0.001.  Deterministic per seed.
Topology sample_link_failures(const Topology& t, std::uint64_t seed);

// Enumerates all failure scenarios (edge subsets, independent failures) with
// probability >= threshold, by include/exclude DFS that prunes any branch
// whose partial product is already below threshold.  Scenarios are sorted by
// size then edge indices; probabilities then normalize per mode.
ScenarioSet enumerate_scenarios(const Topology& t, double threshold,
                                ScenarioMode mode = ScenarioMode::kNormalize);

// The routing polytope: variables are the per-tunnel allocations X_p_t and
// the per-scenario losses t_q; rows are, in order,
//   loss:      t_q >= 1 - sum_tunnels X_pt Y_tq / d_p   per (pair, scenario)
//   capacity:  sum of X over tunnels crossing e <= c_e  per edge
//   sign:      X_pt >= 0
//   box:       0 <= t_q <= 1  (also set as loss-variable bounds)
// with Y_tq = 1 iff no edge of the tunnel is failed in scenario q.
FeasibleSet build_te_feasible_set(const Topology& t, const DemandMatrix& d,
                                  const TunnelSet& tun, const ScenarioSet& s);

struct CaseStudyConfig {
  std::vector<double> gammas;
  double target_mlu = 0.6;
  double prob_threshold = 0.001;
  std::uint64_t seed = 1;
  std::vector<double> delta_prime{0.007, 0.01};
  int b = 10;
  double eps = 1e-6;
  bool with_ip_true = true;
  ScenarioMode mode = ScenarioMode::kNormalize;
};

// Intermediate artifacts of one case-study run, kept for export.
struct CaseStudyArtifacts {
  Topology pruned;  // with sampled failure probabilities
  DemandMatrix demands;
  TunnelSet tunnels;
  ScenarioSet scenarios;
  std::optional<FeasibleSet> set;
  std::vector<double> probs;
};

// Full pipeline: prune, draw failure probabilities (kept when the input
// already assigns one to every edge), enumerate scenarios, generate demands
// and tunnels, assemble the polytope, then run the estimate table once per
// gamma with the quantile IP's big-M pinned to 1 (losses live in [0,1]).
// Labels follow the "name (gamma)" convention.
std::vector<estimators::EstimateReport> run_case_study(
    const Topology& topo, const CaseStudyConfig& cfg,
    CaseStudyArtifacts* artifacts = nullptr);

}  // namespace quantband::te
