#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace censornet {

using nlohmann::json;

RoutingTree::RoutingTree(std::vector<int32_t> parent) : parent_(std::move(parent)) {
  if (parent_.empty()) fail(errc::invalid_scenario, "routing tree needs at least one node");
  if (parent_.size() > static_cast<size_t>(INT32_MAX))
    fail(errc::invalid_scenario, "routing tree too large");
  n_ = static_cast<int32_t>(parent_.size());

  for (int32_t i = 1; i <= n_; ++i) {
    const int32_t p = parent_[i - 1];
    if (p < 0 || p > n_ || p == i)
      fail(errc::invalid_scenario, "parent of node " + std::to_string(i) + " out of range");
  }

  routes_.assign(static_cast<size_t>(n_) * n_, 0);
  paths_.resize(n_);
  for (int32_t j = 1; j <= n_; ++j) {
    auto& path = paths_[j - 1];
    int32_t cur = j;
    int32_t steps = 0;
    while (cur != 0) {
      if (++steps > n_)
        fail(errc::invalid_scenario, "routing loop detected at node " + std::to_string(j));
      path.push_back(cur);
      routes_[static_cast<size_t>(cur - 1) * n_ + (j - 1)] = 1;
      cur = parent_[cur - 1];
    }
  }
  for (int32_t i = 1; i <= n_; ++i)
    if (parent_[i - 1] == 0) sink_neighbors_.push_back(i);
}

std::vector<int32_t> RoutingTree::descendants(int32_t node) const {
  std::vector<int32_t> out;
  for (int32_t j = 1; j <= n_; ++j)
    if (j != node && routes_through(node, j)) out.push_back(j);
  return out;
}

CostModel::CostModel(int32_t n, std::vector<int64_t> censor, std::vector<int64_t> transmit,
                     std::vector<int64_t> silent)
    : n_(n) {
  const size_t cells = static_cast<size_t>(n) * n;
  if (censor.size() != cells || transmit.size() != cells)
    fail(errc::invalid_scenario, "cost matrices must be N x N");
  if (silent.empty()) silent.assign(n, 0);
  if (silent.size() != static_cast<size_t>(n))
    fail(errc::invalid_scenario, "silent cost vector must have N entries");

  c0_.assign(static_cast<size_t>(n) * (n + 1), 0);
  c1_.assign(static_cast<size_t>(n) * (n + 1), 0);
  for (int32_t i = 1; i <= n; ++i) {
    if (silent[i - 1] < 0) fail(errc::invalid_scenario, "silent costs must be >= 0");
    c0_[idx(i, 0)] = silent[i - 1];
    c1_[idx(i, 0)] = silent[i - 1];
    for (int32_t j = 1; j <= n; ++j) {
      const int64_t v0 = censor[static_cast<size_t>(i - 1) * n + (j - 1)];
      const int64_t v1 = transmit[static_cast<size_t>(i - 1) * n + (j - 1)];
      if (v0 < 0 || v1 < 0) fail(errc::invalid_scenario, "costs must be >= 0");
      if (v1 < v0)
        fail(errc::invalid_scenario, "transmit cost below censor cost at node " +
                                         std::to_string(i) + ", source " + std::to_string(j));
      c0_[idx(i, j)] = v0;
      c1_[idx(i, j)] = v1;
    }
  }
}

int64_t CostModel::max_transmit_cost() const {
  int64_t m = 0;
  for (const int64_t v : c1_) m = std::max(m, v);
  return m;
}

void Scenario::validate() const {
  const int32_t n = node_count();
  if (costs.node_count() != n) fail(errc::invalid_scenario, "cost model size mismatch");
  if (source_probs.size() != static_cast<size_t>(n) + 1)
    fail(errc::invalid_scenario, "source probability vector must have N+1 entries");
  double sum = 0.0;
  for (const double p : source_probs) {
    if (!(p >= 0.0)) fail(errc::invalid_scenario, "source probabilities must be >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(errc::invalid_scenario, "source probabilities must sum to 1");
  if (importance.size() != static_cast<size_t>(n))
    fail(errc::invalid_scenario, "importance models must have N entries");
  if (success_prob.size() != static_cast<size_t>(n))
    fail(errc::invalid_scenario, "success probabilities must have N entries");
  for (const double q : success_prob)
    if (!(q >= 0.0 && q <= 1.0)) fail(errc::invalid_scenario, "success probabilities must be in [0,1]");
  if (initial_energy.size() != static_cast<size_t>(n))
    fail(errc::invalid_scenario, "initial energy vector must have N entries");
  for (const int64_t e : initial_energy)
    if (e < 0) fail(errc::invalid_scenario, "initial energies must be >= 0");
}

namespace {

Scenario assemble(RoutingTree tree, CostModel costs, std::vector<double> p,
                  std::vector<ImportanceModel> imp, std::vector<double> q,
                  std::vector<int64_t> e0, uint64_t seed) {
  Scenario s{std::move(tree), std::move(costs), std::move(p),
             std::move(imp),  std::move(q),     std::move(e0), seed};
  s.validate();
  return s;
}

}  // namespace

Scenario build_line_scenario(int32_t n, int64_t sense_cost, int64_t receive_cost,
                             int64_t transmit_cost, int64_t battery) {
  if (n < 1) fail(errc::invalid_argument, "line scenario needs n >= 1");
  if (sense_cost < 0 || receive_cost < 0 || transmit_cost < 0 || battery < 0)
    fail(errc::invalid_argument, "line scenario energies must be >= 0");

  std::vector<int32_t> parent(n);
  for (int32_t i = 1; i <= n; ++i) parent[i - 1] = (i == n) ? 0 : i + 1;
  RoutingTree tree(std::move(parent));

  // Node i relays everything sourced at or below it: c1 adds receive+transmit
  // on relays and sense+transmit at the source.
  std::vector<int64_t> c0(static_cast<size_t>(n) * n, 0);
  std::vector<int64_t> c1(static_cast<size_t>(n) * n, 0);
  for (int32_t j = 1; j <= n; ++j) {
    c0[static_cast<size_t>(j - 1) * n + (j - 1)] = sense_cost;
    for (int32_t i = j; i <= n; ++i) {
      int64_t v = (i == j ? sense_cost : receive_cost) + transmit_cost;
      c1[static_cast<size_t>(i - 1) * n + (j - 1)] = v;
    }
  }

  std::vector<double> p(n + 1, 0.0);
  for (int32_t j = 1; j <= n; ++j) p[j] = 1.0 / n;

  return assemble(std::move(tree), CostModel(n, std::move(c0), std::move(c1), {}), std::move(p),
                  std::vector<ImportanceModel>(n, ImportanceModel::exponential(1.0)),
                  std::vector<double>(n, 1.0), std::vector<int64_t>(n, battery), 0);
}

Scenario build_random_tree_scenario(int32_t n, uint64_t seed, int64_t sense_cost,
                                    int64_t receive_cost, int64_t transmit_lo,
                                    int64_t transmit_hi, int64_t battery) {
  if (n < 1) fail(errc::invalid_argument, "tree scenario needs n >= 1");
  if (sense_cost < 0 || receive_cost < 0 || transmit_lo < 0 || battery < 0)
    fail(errc::invalid_argument, "tree scenario energies must be >= 0");
  if (transmit_hi < transmit_lo) fail(errc::invalid_argument, "empty transmit cost interval");

  CounterRng rng(seed);
  std::vector<int32_t> parent(n);
  for (int32_t i = 1; i <= n; ++i) {
    // uniform over {i+1, ..., n, sink}
    const int64_t pick = i + 1 + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(n - i + 1)));
    parent[i - 1] = pick > n ? 0 : static_cast<int32_t>(pick);
  }
  RoutingTree tree(std::move(parent));

  std::vector<int64_t> per_node_tx(n);
  for (int32_t i = 0; i < n; ++i)
    per_node_tx[i] =
        transmit_lo + static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(transmit_hi - transmit_lo + 1)));

  std::vector<int64_t> c0(static_cast<size_t>(n) * n, 0);
  std::vector<int64_t> c1(static_cast<size_t>(n) * n, 0);
  for (int32_t j = 1; j <= n; ++j) {
    c0[static_cast<size_t>(j - 1) * n + (j - 1)] = sense_cost;
    for (const int32_t i : tree.path(j)) {
      const int64_t v = (i == j ? sense_cost : receive_cost) + per_node_tx[i - 1];
      c1[static_cast<size_t>(i - 1) * n + (j - 1)] = v;
    }
  }

  std::vector<double> p(n + 1, 0.0);
  for (int32_t j = 1; j <= n; ++j) p[j] = 1.0 / n;

  return assemble(std::move(tree), CostModel(n, std::move(c0), std::move(c1), {}), std::move(p),
                  std::vector<ImportanceModel>(n, ImportanceModel::exponential(1.0)),
                  std::vector<double>(n, 1.0), std::vector<int64_t>(n, battery), seed);
}

namespace {

json importance_to_json(const ImportanceModel& m) {
  if (m.kind() == ImportanceModel::Kind::exponential)
    return json{{"kind", "exponential"}, {"mean", m.exponential_mean()}};
  return json{{"kind", "discrete"}, {"values", m.values()}, {"probs", m.probs()}};
}

ImportanceModel importance_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exponential") return ImportanceModel::exponential(j.at("mean").get<double>());
  if (kind == "discrete")
    return ImportanceModel::discrete(j.at("values").get<std::vector<double>>(),
                                     j.at("probs").get<std::vector<double>>());
  fail(errc::invalid_scenario, "unknown importance kind: " + kind);
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  const int32_t n = s.node_count();
  json j;
  j["nodes"] = n;
  std::vector<int32_t> parent(n);
  for (int32_t i = 1; i <= n; ++i) parent[i - 1] = s.tree.parent(i);
  j["parent"] = parent;

  std::vector<std::vector<int64_t>> c0(n, std::vector<int64_t>(n));
  std::vector<std::vector<int64_t>> c1(n, std::vector<int64_t>(n));
  std::vector<int64_t> silent(n);
  for (int32_t i = 1; i <= n; ++i) {
    silent[i - 1] = s.costs.censor_cost(i, 0);
    for (int32_t jj = 1; jj <= n; ++jj) {
      c0[i - 1][jj - 1] = s.costs.censor_cost(i, jj);
      c1[i - 1][jj - 1] = s.costs.transmit_cost(i, jj);
    }
  }
  j["C0"] = c0;
  j["C1"] = c1;
  bool any_silent = false;
  for (const int64_t v : silent) any_silent |= v != 0;
  if (any_silent) j["silent_cost"] = silent;

  j["p"] = s.source_probs;

  bool shared = true;
  for (const auto& m : s.importance) shared &= m == s.importance.front();
  if (shared) {
    j["importance"] = importance_to_json(s.importance.front());
  } else {
    json arr = json::array();
    for (const auto& m : s.importance) arr.push_back(importance_to_json(m));
    j["importance"] = arr;
  }

  bool all_one = true;
  for (const double q : s.success_prob) all_one &= q == 1.0;
  if (!all_one) j["q"] = s.success_prob;

  j["initial_energy"] = s.initial_energy;
  j["seed"] = s.seed;
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(errc::invalid_scenario, std::string("scenario parse error: ") + e.what());
  }
  try {
    const int32_t n = j.at("nodes").get<int32_t>();
    if (n < 1) fail(errc::invalid_scenario, "scenario needs nodes >= 1");
    RoutingTree tree(j.at("parent").get<std::vector<int32_t>>());
    if (tree.node_count() != n) fail(errc::invalid_scenario, "parent list length != nodes");

    const auto c0rows = j.at("C0").get<std::vector<std::vector<int64_t>>>();
    const auto c1rows = j.at("C1").get<std::vector<std::vector<int64_t>>>();
    if (c0rows.size() != static_cast<size_t>(n) || c1rows.size() != static_cast<size_t>(n))
      fail(errc::invalid_scenario, "cost matrices must have N rows");
    std::vector<int64_t> c0, c1;
    c0.reserve(static_cast<size_t>(n) * n);
    c1.reserve(static_cast<size_t>(n) * n);
    for (int32_t i = 0; i < n; ++i) {
      if (c0rows[i].size() != static_cast<size_t>(n) || c1rows[i].size() != static_cast<size_t>(n))
        fail(errc::invalid_scenario, "cost matrices must have N columns");
      c0.insert(c0.end(), c0rows[i].begin(), c0rows[i].end());
      c1.insert(c1.end(), c1rows[i].begin(), c1rows[i].end());
    }
    std::vector<int64_t> silent;
    if (j.contains("silent_cost")) silent = j.at("silent_cost").get<std::vector<int64_t>>();

    std::vector<ImportanceModel> imp;
    const json& ji = j.at("importance");
    if (ji.is_array()) {
      for (const auto& item : ji) imp.push_back(importance_from_json(item));
      if (imp.size() != static_cast<size_t>(n))
        fail(errc::invalid_scenario, "importance array must have N entries");
    } else {
      imp.assign(n, importance_from_json(ji));
    }

    std::vector<double> q(n, 1.0);
    if (j.contains("q")) q = j.at("q").get<std::vector<double>>();

    return assemble(std::move(tree), CostModel(n, std::move(c0), std::move(c1), std::move(silent)),
                    j.at("p").get<std::vector<double>>(), std::move(imp), std::move(q),
                    j.at("initial_energy").get<std::vector<int64_t>>(),
                    j.value("seed", uint64_t{0}));
  } catch (const json::exception& e) {
    fail(errc::invalid_scenario, std::string("scenario field error: ") + e.what());
  }
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario_file(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io, "cannot write scenario file: " + path);
  out << scenario_to_json(s) << "\n";
}

}  // namespace censornet
