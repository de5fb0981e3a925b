#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scenario.hpp"

namespace censornet::asymptotic {

struct LifetimeEstimate {
  std::vector<double> lifetime;     // T_i = e_i / g_i; +inf when g_i = 0
  std::vector<double> consumption;  // g_i, expected per-epoch drain under fixed thresholds
};

struct SolveOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;        // ||mu - mu_prev||_inf at the fixed point
  double bisect_tolerance = 1e-10;
  // Warn when some node holds fewer than this many multiples of its largest
  // single-step cost; the constant-threshold regime degrades there.
  double validity_floor = 10.0;
};

struct Result {
  std::vector<double> mu;  // per-source constant thresholds
  std::vector<double> w;   // per-node marginal value of one energy unit
  int32_t critical = 0;
  double critical_lifetime = 0.0;
  std::vector<int32_t> disconnected, surviving;
  std::vector<double> lifetime, consumption;  // under the returned mu
  int iterations = 0;
  bool oscillation = false;        // partition alternated; smaller-lifetime iterate returned
  bool low_energy_warning = false;
  int clamped_roots = 0;           // slope solves that hit the w >= 0 clamp
  std::string trace;               // one line per iteration
};

// Per-node expected drain g = (C0 + Delta^T F) p under constant thresholds mu,
// and the renewal lifetime e_i / g_i.
LifetimeEstimate stationary_lifetimes(const Scenario& s, const std::vector<double>& mu,
                                      const std::vector<double>& energy);

// Node with the minimum stationary lifetime; ties break to the lowest index.
// Fails if every lifetime is infinite.
std::pair<int32_t, double> critical_node(const LifetimeEstimate& estimate);

// Partition around `node`: (D, S) with D the nodes routed through it and S
// the rest. Sets are ascending; `node` belongs to neither.
std::pair<std::vector<int32_t>, std::vector<int32_t>> split_graph(const RoutingTree& tree,
                                                                  int32_t node);

// Unique root of cbar_i * w + alpha = sum_j p_j h_j(Delta[j][i] * w + beta_j),
// clamped to 0 when even w = 0 overshoots. Bisection to `tol` absolute.
double solve_node_slope(const Scenario& s, int32_t node, double alpha,
                        const std::vector<double>& beta, double tol = 1e-10);

struct ThresholdsOut {
  std::vector<double> w, mu;
  std::vector<int32_t> disconnected, surviving;
  int clamped_roots = 0;
};

// One threshold evaluation for a known critical node: recursive slope solve on
// the surviving subnetwork, scalar solve at the critical node, zero slope on
// the disconnected set. `mu_current` supplies the transmit rates for the
// energy discount of the surviving nodes.
ThresholdsOut thresholds(const Scenario& s, int32_t critical, double critical_lifetime,
                         const std::vector<double>& mu_current, const std::vector<double>& energy,
                         const SolveOptions& options = {});

// Full fixed-point iteration: alternate critical-node identification and
// threshold computation from mu = 0 until both stabilize.
Result solve(const Scenario& s, const std::vector<double>& energy, const SolveOptions& options = {});

// Same, restricted to the nodes flagged in `active` (size N). Source
// probability mass of inactive nodes is folded into the silent epoch. The
// returned vectors keep full size; inactive entries carry mu = 0, w = 0.
Result solve_restricted(const Scenario& s, const std::vector<uint8_t>& active,
                        const std::vector<double>& energy, const SolveOptions& options = {});

}  // namespace censornet::asymptotic
