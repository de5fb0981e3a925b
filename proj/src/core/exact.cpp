#include "exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace censornet {

namespace {

// One self-referencing reward term of a state equation: the state re-enters
// through the censor branch while the transmit branch leaves it.
struct SelfTerm {
  double prob;
  double lambda_transmit;
  const ImportanceModel* model;
};

}  // namespace

ExactSolution::ExactSolution(const Scenario& s, std::vector<int64_t> e_max)
    : scenario_(s), n_(s.node_count()), e_max_(std::move(e_max)) {}

uint64_t ExactSolution::index_of(std::span<const int64_t> e) const {
  uint64_t idx = 0;
  for (int32_t r = 0; r < n_; ++r) idx += static_cast<uint64_t>(e[r]) * stride_[r];
  return idx;
}

ExactSolution ExactSolution::solve(const Scenario& scenario, std::vector<int64_t> e_max,
                                   uint64_t cell_budget) {
  scenario.validate();
  const int32_t n = scenario.node_count();
  if (e_max.size() != static_cast<size_t>(n))
    fail(errc::invalid_argument, "e_max must have one entry per node");
  for (const int64_t m : e_max)
    if (m < 0) fail(errc::invalid_argument, "e_max entries must be >= 0");
  if (cell_budget == 0) cell_budget = kDefaultCellBudget;

  unsigned __int128 wide = 1;
  for (const int64_t m : e_max) {
    wide *= static_cast<uint64_t>(m) + 1;
    if (wide > cell_budget) {
      std::string need = wide > UINT64_MAX ? std::string("more than 2^64")
                                           : std::to_string(static_cast<uint64_t>(wide));
      fail(errc::budget_exceeded, "lattice needs at least " + need + " cells, budget is " +
                                      std::to_string(cell_budget) +
                                      "; raise the budget or shrink e_max");
    }
  }
  const uint64_t cells = static_cast<uint64_t>(wide);

  ExactSolution sol(scenario, std::move(e_max));
  sol.cells_ = cells;
  sol.stride_.assign(n, 1);
  for (int32_t r = n - 2; r >= 0; --r)
    sol.stride_[r] = sol.stride_[r + 1] * (static_cast<uint64_t>(sol.e_max_[r + 1]) + 1);
  sol.run();
  return sol;
}

void ExactSolution::run() {
  const int32_t n = n_;
  const auto& costs = scenario_.costs;
  const auto& p = scenario_.source_probs;

  lambda_.assign(cells_, 0.0);
  mu_.assign(cells_ * n, 0.0);

  std::vector<int64_t> e(n, 0);
  std::vector<int64_t> shifted(n);
  std::vector<uint64_t> censor_idx(n + 1), transmit_idx(n + 1);
  std::vector<SelfTerm> self_terms;

  // States are visited in row-major ascending order, a linear extension of
  // the componentwise order; every clamped shift lands on a finished state.
  for (uint64_t idx = 0; idx < cells_; ++idx) {
    double base = 0.0;
    double self_coeff = 0.0;
    self_terms.clear();

    for (int32_t j = 0; j <= n; ++j) {
      for (int32_t r = 0; r < n; ++r)
        shifted[r] = std::max<int64_t>(e[r] - costs.censor_cost(r + 1, j), 0);
      const uint64_t i0 = index_of(shifted);
      censor_idx[j] = i0;

      uint64_t i1 = i0;
      bool q = false;
      if (j >= 1) {
        for (int32_t r = 0; r < n; ++r)
          shifted[r] = std::max<int64_t>(e[r] - costs.transmit_cost(r + 1, j), 0);
        i1 = index_of(shifted);
        q = true;
        for (const int32_t node : scenario_.tree.path(j))
          if (e[node - 1] < costs.transmit_cost(node, j)) {
            q = false;
            break;
          }
      }
      transmit_idx[j] = i1;

      if (p[j] == 0.0) continue;

      if (i0 != idx) {
        base += p[j] * lambda_[i0];
        if (q)
          base += p[j] * scenario_.importance[j - 1].partial_expectation(lambda_[i0] - lambda_[i1]);
        continue;
      }

      self_coeff += p[j];
      if (!q) continue;
      if (i1 == idx) {
        // Reward with no state change: the total reward diverges.
        if (scenario_.importance[j - 1].partial_expectation(0.0) > 0.0)
          fail(errc::degenerate, "source " + std::to_string(j) +
                                     " yields reward at zero cost; total reward diverges");
        continue;
      }
      self_terms.push_back({p[j], lambda_[i1], &scenario_.importance[j - 1]});
    }

    double v;
    if (self_terms.empty()) {
      if (self_coeff >= 1.0 - 1e-15) {
        if (base > 0.0)
          fail(errc::degenerate, "state equation has no finite solution");
        v = 0.0;
      } else {
        v = base / (1.0 - self_coeff);
      }
    } else {
      // lambda(e) solves (1-a)v = base + sum p_j h_j(v - lambda_1j); the left
      // side is strictly increasing relative to the right, so bisect.
      const auto f = [&](double v_) {
        double rhs = base;
        for (const auto& t : self_terms)
          rhs += t.prob * t.model->partial_expectation(v_ - t.lambda_transmit);
        return (1.0 - self_coeff) * v_ - rhs;
      };
      double lo = 0.0, hi = 1.0;
      int doubling = 0;
      while (f(hi) < 0.0) {
        hi *= 2.0;
        if (++doubling > 200)
          fail(errc::degenerate, "state equation diverges; scenario admits unbounded reward");
      }
      for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
      }
      v = 0.5 * (lo + hi);
    }
    lambda_[idx] = v;

    for (int32_t j = 1; j <= n; ++j)
      mu_[idx * n + (j - 1)] = lambda_[censor_idx[j]] - lambda_[transmit_idx[j]];

    // odometer increment
    for (int32_t r = n - 1; r >= 0; --r) {
      if (e[r] < e_max_[r]) {
        ++e[r];
        break;
      }
      e[r] = 0;
    }
  }
}

double ExactSolution::value(std::span<const int64_t> e) const {
  if (e.size() != static_cast<size_t>(n_)) fail(errc::out_of_range, "state has wrong dimension");
  for (int32_t r = 0; r < n_; ++r)
    if (e[r] < 0 || e[r] > e_max_[r]) fail(errc::out_of_range, "state outside the lattice");
  return lambda_[index_of(e)];
}

double ExactSolution::threshold(std::span<const int64_t> e, int32_t source) const {
  if (source < 1 || source > n_) fail(errc::out_of_range, "source out of range");
  if (e.size() != static_cast<size_t>(n_)) fail(errc::out_of_range, "state has wrong dimension");
  for (int32_t r = 0; r < n_; ++r)
    if (e[r] < 0 || e[r] > e_max_[r]) fail(errc::out_of_range, "state outside the lattice");
  return mu_[index_of(e) * n_ + (source - 1)];
}

double ExactSolution::max_bellman_residual() const {
  const auto& costs = scenario_.costs;
  const auto& p = scenario_.source_probs;
  double worst = 0.0;

  std::vector<int64_t> e(n_, 0);
  std::vector<int64_t> shifted(n_);
  for (uint64_t idx = 0; idx < cells_; ++idx) {
    double rhs = 0.0;
    for (int32_t j = 0; j <= n_; ++j) {
      if (p[j] == 0.0) continue;
      for (int32_t r = 0; r < n_; ++r)
        shifted[r] = std::max<int64_t>(e[r] - costs.censor_cost(r + 1, j), 0);
      const uint64_t i0 = index_of(shifted);
      rhs += p[j] * lambda_[i0];
      if (j == 0) continue;
      bool q = true;
      for (const int32_t node : scenario_.tree.path(j))
        if (e[node - 1] < costs.transmit_cost(node, j)) {
          q = false;
          break;
        }
      if (!q) continue;
      for (int32_t r = 0; r < n_; ++r)
        shifted[r] = std::max<int64_t>(e[r] - costs.transmit_cost(r + 1, j), 0);
      rhs += p[j] * scenario_.importance[j - 1].partial_expectation(lambda_[i0] -
                                                                    lambda_[index_of(shifted)]);
    }
    worst = std::max(worst, std::abs(lambda_[idx] - rhs));

    for (int32_t r = n_ - 1; r >= 0; --r) {
      if (e[r] < e_max_[r]) {
        ++e[r];
        break;
      }
      e[r] = 0;
    }
  }
  return worst;
}

bool ExactSolution::value_is_monotone() const {
  std::vector<int64_t> e(n_, 0);
  for (uint64_t idx = 0; idx < cells_; ++idx) {
    for (int32_t r = 0; r < n_; ++r)
      if (e[r] > 0 && lambda_[idx] < lambda_[idx - stride_[r]]) return false;
    for (int32_t r = n_ - 1; r >= 0; --r) {
      if (e[r] < e_max_[r]) {
        ++e[r];
        break;
      }
      e[r] = 0;
    }
  }
  return true;
}

LatticeSlice ExactSolution::slice(const std::vector<int64_t>& fixed, int32_t source) const {
  if (fixed.size() != static_cast<size_t>(n_))
    fail(errc::invalid_argument, "slice spec must have one entry per node");
  if (source < 0 || source > n_) fail(errc::out_of_range, "source out of range");

  LatticeSlice out;
  out.fixed = fixed;
  uint64_t count = 1;
  for (int32_t r = 0; r < n_; ++r) {
    if (fixed[r] < 0) {
      out.free_nodes.push_back(r + 1);
      out.extents.push_back(e_max_[r] + 1);
      count *= static_cast<uint64_t>(e_max_[r]) + 1;
    } else if (fixed[r] > e_max_[r]) {
      fail(errc::out_of_range, "fixed coordinate outside the lattice");
    }
  }
  if (out.free_nodes.empty()) fail(errc::invalid_argument, "empty slice: no free axis");

  out.values.reserve(count);
  std::vector<int64_t> e(n_);
  for (int32_t r = 0; r < n_; ++r) e[r] = std::max<int64_t>(fixed[r], 0);
  for (uint64_t k = 0; k < count; ++k) {
    const uint64_t idx = index_of(e);
    out.values.push_back(source == 0 ? lambda_[idx] : mu_[idx * n_ + (source - 1)]);
    for (auto it = out.free_nodes.rbegin(); it != out.free_nodes.rend(); ++it) {
      const int32_t r = *it - 1;
      if (e[r] < e_max_[r]) {
        ++e[r];
        break;
      }
      e[r] = 0;
    }
  }
  return out;
}

}  // namespace censornet
