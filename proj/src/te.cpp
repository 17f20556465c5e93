#include "quantband/te.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace quantband::te {

namespace {

// Index view of a topology with name-sorted adjacency, so that every search
// below is deterministic under node renaming-free inputs.
struct Graph {
  std::vector<std::string> names;
  std::map<std::string, int> index;
  std::vector<std::pair<int, int>> ends;                 // edge -> endpoints
  std::vector<std::vector<std::pair<int, int>>> adj;     // node -> (nbr, edge)

  explicit Graph(const Topology& t) {
    names = t.nodes;
    for (int i = 0; i < static_cast<int>(names.size()); ++i) index[names[i]] = i;
    adj.resize(names.size());
    for (const auto& e : t.edges) {
      const int u = index.at(e.u), v = index.at(e.v);
      const int id = static_cast<int>(ends.size());
      ends.emplace_back(u, v);
      adj[u].emplace_back(v, id);
      adj[v].emplace_back(u, id);
    }
    for (auto& row : adj)
      std::sort(row.begin(), row.end(), [&](auto a, auto b) {
        return names[a.first] < names[b.first];
      });
  }

  int n() const { return static_cast<int>(names.size()); }
};

const std::vector<char> kNoMask;

bool masked(const std::vector<char>& mask, int i) {
  return !mask.empty() && mask[i];
}

// Hop counts to `to`, honoring the optional edge/node masks.
std::vector<int> bfs_dist(const Graph& g, int to,
                          const std::vector<char>& edge_off,
                          const std::vector<char>& node_off) {
  std::vector<int> dist(g.n(), -1);
  if (masked(node_off, to)) return dist;
  std::queue<int> q;
  dist[to] = 0;
  q.push(to);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (auto [w, e] : g.adj[v]) {
      if (masked(edge_off, e) || masked(node_off, w) || dist[w] >= 0) continue;
      dist[w] = dist[v] + 1;
      q.push(w);
    }
  }
  return dist;
}

// Lexicographically smallest (by node name sequence) shortest path; empty
// when unreachable.
std::vector<int> lex_shortest_path(const Graph& g, int src, int dst,
                                   const std::vector<char>& edge_off = kNoMask,
                                   const std::vector<char>& node_off = kNoMask) {
  auto dist = bfs_dist(g, dst, edge_off, node_off);
  if (masked(node_off, src) || dist[src] < 0) return {};
  std::vector<int> path{src};
  int cur = src;
  while (cur != dst) {
    int next = -1;
    for (auto [w, e] : g.adj[cur]) {  // adjacency is name-sorted
      if (masked(edge_off, e) || masked(node_off, w)) continue;
      if (dist[w] == dist[cur] - 1) {
        next = w;
        break;
      }
    }
    path.push_back(next);
    cur = next;
  }
  return path;
}

std::vector<std::string> to_names(const Graph& g, const std::vector<int>& path) {
  std::vector<std::string> out;
  out.reserve(path.size());
  for (int v : path) out.push_back(g.names[v]);
  return out;
}

// Second-shortest simple path (strictly different from `best`): standard
// one-deviation search off the shortest path.
std::vector<int> second_shortest_path(const Graph& g, int src, int dst,
                                      const std::vector<int>& best) {
  std::vector<int> champion;
  auto better = [&](const std::vector<int>& a, const std::vector<int>& b) {
    if (b.empty()) return true;
    if (a.size() != b.size()) return a.size() < b.size();
    return to_names(g, a) < to_names(g, b);
  };
  for (std::size_t i = 0; i + 1 < best.size(); ++i) {
    std::vector<char> edge_off(g.ends.size(), 0), node_off(g.n(), 0);
    for (std::size_t r = 0; r < i; ++r) node_off[best[r]] = 1;
    for (auto [w, e] : g.adj[best[i]])
      if (w == best[i + 1]) edge_off[e] = 1;
    auto spur = lex_shortest_path(g, best[i], dst, edge_off, node_off);
    if (spur.empty()) continue;
    std::vector<int> cand(best.begin(), best.begin() + i);
    cand.insert(cand.end(), spur.begin(), spur.end());
    if (cand != best && better(cand, champion)) champion = cand;
  }
  return champion;
}

int edge_between(const Graph& g, int u, int v) {
  for (auto [w, e] : g.adj[u])
    if (w == v) return e;
  return -1;
}

std::string pair_tag(const std::string& s, const std::string& t) {
  return s + "-" + t;
}

std::string fmt_gamma(double g) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", g);
  return buf;
}

}  // namespace

void validate_topology(const Topology& t) {
  if (t.nodes.empty()) throw std::invalid_argument("topology: no nodes");
  std::set<std::string> seen;
  for (const auto& n : t.nodes) {
    if (n.empty()) throw std::invalid_argument("topology: empty node name");
    if (!seen.insert(n).second)
      throw std::invalid_argument("topology: duplicate node " + n);
  }
  std::set<std::pair<std::string, std::string>> edges;
  for (const auto& e : t.edges) {
    if (!seen.count(e.u) || !seen.count(e.v))
      throw std::invalid_argument("topology: edge endpoint not a node: " +
                                  pair_tag(e.u, e.v));
    if (e.u == e.v)
      throw std::invalid_argument("topology: self loop at " + e.u);
    auto key = std::minmax(e.u, e.v);
    if (!edges.insert(key).second)
      throw std::invalid_argument("topology: duplicate edge " +
                                  pair_tag(key.first, key.second));
    if (!(e.capacity > 0.0))
      throw std::invalid_argument("topology: non-positive capacity on " +
                                  pair_tag(e.u, e.v));
    if (e.fail_prob && !(*e.fail_prob > 0.0 && *e.fail_prob < 1.0))
      throw std::invalid_argument("topology: failure probability outside (0,1) on " +
                                  pair_tag(e.u, e.v));
  }
}

Topology prune_topology(const Topology& t) {
  validate_topology(t);
  std::map<std::string, int> deg;
  for (const auto& n : t.nodes) deg[n] = 0;
  std::set<std::pair<std::string, std::string>> alive_edges;
  for (const auto& e : t.edges) {
    ++deg[e.u];
    ++deg[e.v];
    alive_edges.insert(std::minmax(e.u, e.v));
  }
  std::set<std::string> removed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : t.nodes) {
      if (removed.count(n) || deg[n] > 1) continue;
      removed.insert(n);
      changed = true;
      for (const auto& e : t.edges) {
        auto key = std::minmax(e.u, e.v);
        if (!alive_edges.count(key) || (e.u != n && e.v != n)) continue;
        alive_edges.erase(key);
        --deg[e.u];
        --deg[e.v];
      }
    }
  }
  Topology out;
  out.name = t.name;
  for (const auto& n : t.nodes)
    if (!removed.count(n)) out.nodes.push_back(n);
  for (const auto& e : t.edges)
    if (alive_edges.count(std::minmax(e.u, e.v))) out.edges.push_back(e);
  if (out.nodes.empty())
    throw std::invalid_argument("prune_topology: pruning emptied the graph");

  Graph g(out);
  auto dist = bfs_dist(g, 0, kNoMask, kNoMask);
  for (int v = 0; v < g.n(); ++v)
    if (dist[v] < 0)
      throw std::invalid_argument(
          "prune_topology: pruned graph is disconnected");
  return out;
}

std::vector<std::pair<std::string, std::string>> all_pairs(const Topology& t) {
  std::vector<std::string> names = t.nodes;
  std::sort(names.begin(), names.end());
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j)
      out.emplace_back(names[i], names[j]);
  return out;
}

TunnelSet gen_tunnels(
    const Topology& t,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  validate_topology(t);
  Graph g(t);
  TunnelSet out;
  for (const auto& [s, d] : pairs) {
    if (!g.index.count(s) || !g.index.count(d) || s == d)
      throw std::invalid_argument("gen_tunnels: bad pair " + pair_tag(s, d));
    const int src = g.index.at(s), dst = g.index.at(d);
    auto first = lex_shortest_path(g, src, dst);
    if (first.empty())
      throw std::invalid_argument("gen_tunnels: no path for " + pair_tag(s, d));

    std::vector<char> edge_off(g.ends.size(), 0);
    for (std::size_t i = 0; i + 1 < first.size(); ++i)
      edge_off[edge_between(g, first[i], first[i + 1])] = 1;
    auto second = lex_shortest_path(g, src, dst, edge_off);
    if (second.empty()) second = second_shortest_path(g, src, dst, first);

    PairTunnels pt;
    pt.src = s;
    pt.dst = d;
    pt.paths.push_back(to_names(g, first));
    if (!second.empty()) {
      pt.paths.push_back(to_names(g, second));
    } else {
      out.warnings.push_back("single tunnel for " + pair_tag(s, d));
    }
    out.pairs.push_back(std::move(pt));
  }
  return out;
}

double shortest_path_mlu(const Topology& t, const DemandMatrix& d) {
  Graph g(t);
  std::vector<double> load(t.edges.size(), 0.0);
  for (const auto& entry : d.entries) {
    if (!g.index.count(entry.src) || !g.index.count(entry.dst))
      throw std::invalid_argument("mlu: demand endpoint not in topology: " +
                                  pair_tag(entry.src, entry.dst));
    auto path = lex_shortest_path(g, g.index.at(entry.src), g.index.at(entry.dst));
    if (path.empty())
      throw std::invalid_argument("mlu: disconnected pair " +
                                  pair_tag(entry.src, entry.dst));
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      load[edge_between(g, path[i], path[i + 1])] += entry.demand;
  }
  double mlu = 0.0;
  for (std::size_t e = 0; e < load.size(); ++e)
    mlu = std::max(mlu, load[e] / t.edges[e].capacity);
  return mlu;
}

DemandMatrix gen_demands_gravity(const Topology& t, double target_mlu,
                                 std::uint64_t /*seed*/) {
  validate_topology(t);
  if (!(target_mlu > 0.0 && target_mlu <= 1.0))
    throw std::invalid_argument("gen_demands_gravity: target mlu outside (0,1]");
  std::map<std::string, double> w;
  for (const auto& e : t.edges) {
    w[e.u] += e.capacity;
    w[e.v] += e.capacity;
  }
  DemandMatrix dm;
  for (const auto& [s, d] : all_pairs(t))
    dm.entries.push_back({s, d, w[s] * w[d]});
  const double mlu = shortest_path_mlu(t, dm);
  if (!(mlu > 0.0))
    throw std::invalid_argument("gen_demands_gravity: degenerate demands");
  const double scale = target_mlu / mlu;
  for (auto& entry : dm.entries) entry.demand *= scale;
  return dm;
}

Topology sample_link_failures(const Topology& t, std::uint64_t seed) {
  validate_topology(t);
  Topology out = t;
  std::mt19937_64 rng(seed);
  // Median of Weibull(k, lambda) is lambda * (ln 2)^(1/k); solve for 0.001.
  std::weibull_distribution<double> weibull(0.8,
                                            0.001 / std::pow(std::log(2.0), 1.25));
  for (auto& e : out.edges) {
    double v = 0.0;
    do {
      v = weibull(rng);
    } while (!(v > 0.0 && v < 1.0));
    e.fail_prob = v;
  }
  return out;
}

ScenarioSet enumerate_scenarios(const Topology& t, double threshold,
                                ScenarioMode mode) {
  validate_topology(t);
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("enumerate_scenarios: threshold outside (0,1)");
  const int m = static_cast<int>(t.edges.size());
  std::vector<double> p(m);
  for (int e = 0; e < m; ++e) {
    if (!t.edges[e].fail_prob)
      throw std::invalid_argument(
          "enumerate_scenarios: edge without failure probability: " +
          pair_tag(t.edges[e].u, t.edges[e].v));
    p[e] = *t.edges[e].fail_prob;
  }

  ScenarioSet out;
  out.mode = mode;
  std::vector<int> current;
  // Every undecided factor is <= 1, so a partial product below the threshold
  // can never recover: prune.
  auto rec = [&](auto&& self, int e, double product) -> void {
    if (product < threshold) return;
    if (e == m) {
      out.scenarios.push_back({current, product});
      return;
    }
    current.push_back(e);
    self(self, e + 1, product * p[e]);
    current.pop_back();
    self(self, e + 1, product * (1.0 - p[e]));
  };
  rec(rec, 0, 1.0);

  std::sort(out.scenarios.begin(), out.scenarios.end(),
            [](const Scenario& a, const Scenario& b) {
              if (a.failed.size() != b.failed.size())
                return a.failed.size() < b.failed.size();
              return a.failed < b.failed;
            });
  double mass = 0.0;
  for (const auto& s : out.scenarios) mass += s.prob;
  out.raw_mass = mass;
  if (mode == ScenarioMode::kNormalize) {
    if (out.scenarios.empty())
      throw std::invalid_argument(
          "enumerate_scenarios: no scenario meets the threshold");
    for (auto& s : out.scenarios) s.prob /= mass;
  } else if (1.0 - mass > 1e-15) {
    Scenario rest;
    for (int e = 0; e < m; ++e) rest.failed.push_back(e);
    rest.prob = 1.0 - mass;
    if (!out.scenarios.empty() &&
        out.scenarios.back().failed == rest.failed)
      out.scenarios.back().prob += rest.prob;
    else
      out.scenarios.push_back(std::move(rest));
  }
  return out;
}

FeasibleSet build_te_feasible_set(const Topology& t, const DemandMatrix& d,
                                  const TunnelSet& tun, const ScenarioSet& s) {
  validate_topology(t);
  Graph g(t);
  const int nq = static_cast<int>(s.scenarios.size());
  if (nq == 0) throw std::invalid_argument("te set: no scenarios");

  std::map<std::pair<std::string, std::string>, double> demand_of;
  for (const auto& entry : d.entries) {
    if (!(entry.demand > 0.0))
      throw std::invalid_argument("te set: non-positive demand for " +
                                  pair_tag(entry.src, entry.dst));
    if (!demand_of.emplace(std::make_pair(entry.src, entry.dst), entry.demand)
             .second)
      throw std::invalid_argument("te set: duplicate demand pair " +
                                  pair_tag(entry.src, entry.dst));
  }

  // Tunnels, flattened to columns; every pair needs a demand and vice versa.
  struct Col {
    int pair, tunnel;
    std::vector<int> edges;
  };
  std::vector<Col> cols;
  std::vector<double> dem(tun.pairs.size());
  for (std::size_t pi = 0; pi < tun.pairs.size(); ++pi) {
    const auto& pt = tun.pairs[pi];
    auto it = demand_of.find({pt.src, pt.dst});
    if (it == demand_of.end())
      throw std::invalid_argument("te set: no demand for tunnel pair " +
                                  pair_tag(pt.src, pt.dst));
    dem[pi] = it->second;
    demand_of.erase(it);
    if (pt.paths.empty())
      throw std::invalid_argument("te set: pair without tunnels " +
                                  pair_tag(pt.src, pt.dst));
    for (std::size_t ti = 0; ti < pt.paths.size(); ++ti) {
      const auto& path = pt.paths[ti];
      if (path.size() < 2 || path.front() != pt.src || path.back() != pt.dst)
        throw std::invalid_argument("te set: malformed tunnel for " +
                                    pair_tag(pt.src, pt.dst));
      Col col{static_cast<int>(pi), static_cast<int>(ti), {}};
      std::set<std::string> visited;
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        if (!visited.insert(path[i]).second)
          throw std::invalid_argument("te set: tunnel revisits " + path[i]);
        if (!g.index.count(path[i]) || !g.index.count(path[i + 1]))
          throw std::invalid_argument("te set: tunnel node not in topology");
        const int e =
            edge_between(g, g.index.at(path[i]), g.index.at(path[i + 1]));
        if (e < 0)
          throw std::invalid_argument("te set: tunnel uses missing edge " +
                                      pair_tag(path[i], path[i + 1]));
        col.edges.push_back(e);
      }
      cols.push_back(std::move(col));
    }
  }
  if (!demand_of.empty())
    throw std::invalid_argument("te set: demand pair without tunnels " +
                                pair_tag(demand_of.begin()->first.first,
                                         demand_of.begin()->first.second));

  const int nx = static_cast<int>(cols.size());
  const int ne = static_cast<int>(t.edges.size());
  std::vector<std::vector<char>> down(nq, std::vector<char>(ne, 0));
  for (int q = 0; q < nq; ++q)
    for (int e : s.scenarios[q].failed) down[q][e] = 1;

  std::vector<std::vector<double>> a, b;
  std::vector<double> c;
  auto blank_row = [&] {
    a.emplace_back(nx, 0.0);
    b.emplace_back(nq, 0.0);
    c.push_back(0.0);
  };

  // Loss rows: t_q >= 1 - sum X Y / d, pair-major.
  for (std::size_t pi = 0; pi < tun.pairs.size(); ++pi)
    for (int q = 0; q < nq; ++q) {
      blank_row();
      for (int j = 0; j < nx; ++j) {
        if (cols[j].pair != static_cast<int>(pi)) continue;
        bool functional = true;
        for (int e : cols[j].edges)
          if (down[q][e]) functional = false;
        if (functional) a.back()[j] = -1.0 / dem[pi];
      }
      b.back()[q] = -1.0;
      c.back() = -1.0;
    }
  // Capacity rows.
  for (int e = 0; e < ne; ++e) {
    blank_row();
    for (int j = 0; j < nx; ++j)
      for (int ce : cols[j].edges)
        if (ce == e) a.back()[j] = 1.0;
    c.back() = t.edges[e].capacity;
  }
  // Allocation sign rows.
  for (int j = 0; j < nx; ++j) {
    blank_row();
    a.back()[j] = -1.0;
  }
  // Loss box rows.
  for (int q = 0; q < nq; ++q) {
    blank_row();
    b.back()[q] = 1.0;
    c.back() = 1.0;
    blank_row();
    b.back()[q] = -1.0;
  }

  std::vector<std::string> x_names, t_names;
  for (const auto& col : cols)
    x_names.push_back("X_" + std::to_string(col.pair) + "_" +
                      std::to_string(col.tunnel));
  for (int q = 0; q < nq; ++q) t_names.push_back("t_" + std::to_string(q));
  return FeasibleSet(std::move(a), std::move(b), std::move(c),
                     std::move(x_names), std::move(t_names),
                     std::vector<double>(nq, 0.0), std::vector<double>(nq, 1.0));
}

std::vector<estimators::EstimateReport> run_case_study(
    const Topology& topo, const CaseStudyConfig& cfg,
    CaseStudyArtifacts* artifacts) {
  auto stage = [](const char* tag, auto&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(tag) + ": " + e.what());
    }
  };

  auto pruned = stage("prune", [&] { return prune_topology(topo); });
  const bool have_probs =
      std::all_of(pruned.edges.begin(), pruned.edges.end(),
                  [](const Edge& e) { return e.fail_prob.has_value(); });
  if (!have_probs)
    pruned = stage("failures",
                   [&] { return sample_link_failures(pruned, cfg.seed); });
  auto scen = stage("scenarios", [&] {
    return enumerate_scenarios(pruned, cfg.prob_threshold, cfg.mode);
  });
  auto demands = stage("demands", [&] {
    return gen_demands_gravity(pruned, cfg.target_mlu, cfg.seed);
  });
  auto tunnels =
      stage("tunnels", [&] { return gen_tunnels(pruned, all_pairs(pruned)); });
  auto fs = stage("set", [&] {
    return build_te_feasible_set(pruned, demands, tunnels, scen);
  });
  std::vector<double> probs;
  for (const auto& sc : scen.scenarios) probs.push_back(sc.prob);

  std::vector<estimators::EstimateReport> reports;
  for (double gamma : cfg.gammas) {
    estimators::EstimateConfig ec;
    ec.delta_prime = cfg.delta_prime;
    ec.b = cfg.b;
    ec.eps = cfg.eps;
    ec.with_ip_true = cfg.with_ip_true;
    ec.big_m = 1.0;  // losses are fractions
    const std::string name = topo.name.empty() ? "topology" : topo.name;
    auto r = stage("estimate", [&] {
      return estimators::estimate_var_min(fs, probs, gamma, ec,
                                          name + " (" + fmt_gamma(gamma) + ")");
    });
    r.metadata["seed"] = static_cast<double>(cfg.seed);
    r.metadata["target_mlu"] = cfg.target_mlu;
    r.metadata["prob_threshold"] = cfg.prob_threshold;
    r.metadata["nodes"] = static_cast<double>(pruned.nodes.size());
    r.metadata["edges"] = static_cast<double>(pruned.edges.size());
    r.metadata["pairs"] = static_cast<double>(tunnels.pairs.size());
    r.metadata["scenarios"] = static_cast<double>(scen.scenarios.size());
    for (const auto& w : tunnels.warnings) r.warnings.push_back("tunnels: " + w);
    reports.push_back(std::move(r));
  }

  if (artifacts) {
    artifacts->pruned = std::move(pruned);
    artifacts->demands = std::move(demands);
    artifacts->tunnels = std::move(tunnels);
    artifacts->scenarios = std::move(scen);
    artifacts->set = std::move(fs);
    artifacts->probs = std::move(probs);
  }
  return reports;
}

}  // namespace quantband::te
