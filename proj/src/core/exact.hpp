#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "scenario.hpp"

namespace censornet {

inline constexpr uint64_t kDefaultCellBudget = 40'000'000;

// Transmit iff q * x clears the threshold; ties transmit.
inline int decide(double mu, double q, double x) { return q * x >= mu ? 1 : 0; }

// Rectangular slice of a solved table: values swept row-major over the free
// axes in ascending node order, all other axes pinned.
struct LatticeSlice {
  std::vector<int32_t> free_nodes;    // nodes swept 0..e_max, ascending ids
  std::vector<int64_t> fixed;         // size N; -1 marks a free axis
  std::vector<int64_t> extents;       // per free axis: e_max + 1
  std::vector<double> values;
};

// Optimal value (lambda) and threshold (mu) tables over the integer energy
// lattice [0,e_max_1] x ... x [0,e_max_N]. Feasible for small networks only;
// the lattice grows as the product of the per-node ranges.
class ExactSolution {
 public:
  static ExactSolution solve(const Scenario& scenario, std::vector<int64_t> e_max,
                             uint64_t cell_budget = kDefaultCellBudget);

  int32_t node_count() const { return n_; }
  const std::vector<int64_t>& e_max() const { return e_max_; }
  uint64_t cell_count() const { return cells_; }

  // Total expected reward from battery state e.
  double value(std::span<const int64_t> e) const;
  // Threshold applied to messages sourced at `source` in state e.
  double threshold(std::span<const int64_t> e, int32_t source) const;

  // Worst one-step self-consistency error of the value table.
  double max_bellman_residual() const;
  // True iff the value table is non-decreasing along every coordinate.
  bool value_is_monotone() const;

  // source = 0 slices the value table, otherwise the threshold table.
  LatticeSlice slice(const std::vector<int64_t>& fixed, int32_t source) const;

  const Scenario& scenario() const { return scenario_; }

 private:
  ExactSolution(const Scenario& s, std::vector<int64_t> e_max);

  uint64_t index_of(std::span<const int64_t> e) const;
  void run();

  Scenario scenario_;
  int32_t n_ = 0;
  std::vector<int64_t> e_max_;
  std::vector<uint64_t> stride_;
  uint64_t cells_ = 0;
  std::vector<double> lambda_;  // cells
  std::vector<double> mu_;      // cells * n, source-major within a cell
};

}  // namespace censornet
