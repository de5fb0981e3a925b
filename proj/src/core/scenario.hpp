#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "importance.hpp"

namespace censornet {

// Nodes are numbered 1..N. Index 0 denotes the sink as a routing destination
// and the "no message" event as a source. Internal storage is 0-based.
class RoutingTree {
 public:
  // parent[k] is the next hop of node k+1 toward the sink; 0 means the sink.
  explicit RoutingTree(std::vector<int32_t> parent);

  int32_t node_count() const { return n_; }
  int32_t parent(int32_t node) const { return parent_[node - 1]; }

  // True iff messages sourced at `source` traverse `node` (includes node == source).
  bool routes_through(int32_t node, int32_t source) const {
    return routes_[static_cast<size_t>(node - 1) * n_ + (source - 1)] != 0;
  }

  // Nodes on the route of `source`, ordered source -> sink neighbor.
  const std::vector<int32_t>& path(int32_t source) const { return paths_[source - 1]; }

  // Nodes whose route passes through `node`, excluding `node` itself.
  std::vector<int32_t> descendants(int32_t node) const;

  const std::vector<int32_t>& sink_neighbors() const { return sink_neighbors_; }

  bool operator==(const RoutingTree& o) const { return parent_ == o.parent_; }

 private:
  int32_t n_ = 0;
  std::vector<int32_t> parent_;
  std::vector<uint8_t> routes_;  // n*n, row = node, col = source
  std::vector<std::vector<int32_t>> paths_;
  std::vector<int32_t> sink_neighbors_;
};

// Expected per-node consumption per source. Column j (1..N) is the cost
// vector charged when source j's message is censored (c0) or transmitted
// (c1); column 0 is the silent-epoch cost, identical for both actions.
class CostModel {
 public:
  CostModel(int32_t n, std::vector<int64_t> censor, std::vector<int64_t> transmit,
            std::vector<int64_t> silent);

  int32_t node_count() const { return n_; }

  // source in [0..N], node in [1..N]
  int64_t censor_cost(int32_t node, int32_t source) const { return c0_[idx(node, source)]; }
  int64_t transmit_cost(int32_t node, int32_t source) const { return c1_[idx(node, source)]; }
  int64_t delta(int32_t node, int32_t source) const {
    return c1_[idx(node, source)] - c0_[idx(node, source)];
  }
  int64_t max_transmit_cost() const;

  bool operator==(const CostModel&) const = default;

 private:
  size_t idx(int32_t node, int32_t source) const {
    return static_cast<size_t>(node - 1) * (n_ + 1) + source;
  }
  int32_t n_ = 0;
  std::vector<int64_t> c0_, c1_;  // n x (n+1), column 0 = silent epoch
};

struct Scenario {
  RoutingTree tree;
  CostModel costs;
  std::vector<double> source_probs;         // size N+1, [0] = silent epoch
  std::vector<ImportanceModel> importance;  // size N, per source
  std::vector<double> success_prob;         // size N, per-source Q in the constant-threshold regime
  std::vector<int64_t> initial_energy;      // size N
  uint64_t seed = 0;

  int32_t node_count() const { return tree.node_count(); }
  void validate() const;  // throws errc::invalid_scenario
};

// Chain 1 -> 2 -> ... -> n -> sink with uniform source probabilities and
// exponential(1) importance. Costs: the source pays sense + transmit, each
// relay pays receive + transmit.
Scenario build_line_scenario(int32_t n, int64_t sense_cost, int64_t receive_cost,
                             int64_t transmit_cost, int64_t battery);

// Random tree: node i attaches to a uniformly drawn node of higher index (or
// the sink). Per-node transmit cost drawn once from the integer interval
// [transmit_lo, transmit_hi]. Deterministic for a fixed seed.
Scenario build_random_tree_scenario(int32_t n, uint64_t seed, int64_t sense_cost,
                                    int64_t receive_cost, int64_t transmit_lo,
                                    int64_t transmit_hi, int64_t battery);

Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
Scenario load_scenario_file(const std::string& path);
void save_scenario_file(const Scenario& s, const std::string& path);

}  // namespace censornet
