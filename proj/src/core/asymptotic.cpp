#include "asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace censornet::asymptotic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Working view of a (sub)network. Nodes are 1..n internally; ids[] maps them
// back to the caller's labels. Per-source vectors have n+1 slots, slot 0 being
// the silent epoch.
struct Problem {
  int32_t n = 0;
  std::vector<int32_t> ids;       // size n+1, [0] unused
  std::vector<int32_t> parent;    // size n+1, internal ids, 0 = sink
  std::vector<int64_t> c0, c1;    // n x (n+1), column 0 = silent epoch
  std::vector<double> p;          // size n+1
  std::vector<const ImportanceModel*> imp;  // size n+1, [0] null
  std::vector<double> q;          // size n+1, [0] unused

  int64_t cost0(int32_t node, int32_t source) const {
    return c0[static_cast<size_t>(node - 1) * (n + 1) + source];
  }
  int64_t cost1(int32_t node, int32_t source) const {
    return c1[static_cast<size_t>(node - 1) * (n + 1) + source];
  }
  double delta(int32_t node, int32_t source) const {
    return static_cast<double>(cost1(node, source) - cost0(node, source));
  }
  double cbar(int32_t node) const {
    double s = 0.0;
    for (int32_t j = 0; j <= n; ++j) s += p[j] * static_cast<double>(cost0(node, j));
    return s;
  }
  // E{(q_j x - v)^+} for source j.
  double excess(int32_t j, double v) const {
    const double qj = q[j];
    if (qj == 1.0) return imp[j]->partial_expectation(v);
    if (qj > 0.0) return qj * imp[j]->partial_expectation(v / qj);
    return v < 0.0 ? -v : 0.0;
  }
  bool routes_through(int32_t node, int32_t source) const {
    for (int32_t cur = source; cur != 0; cur = parent[cur])
      if (cur == node) return true;
    return false;
  }
};

Problem problem_from_scenario(const Scenario& s) {
  const int32_t n = s.node_count();
  Problem pb;
  pb.n = n;
  pb.ids.resize(n + 1);
  pb.parent.resize(n + 1);
  pb.p.resize(n + 1);
  pb.imp.assign(n + 1, nullptr);
  pb.q.assign(n + 1, 1.0);
  pb.c0.resize(static_cast<size_t>(n) * (n + 1));
  pb.c1.resize(static_cast<size_t>(n) * (n + 1));
  pb.ids[0] = 0;
  pb.parent[0] = 0;
  pb.p[0] = s.source_probs[0];
  for (int32_t i = 1; i <= n; ++i) {
    pb.ids[i] = i;
    pb.parent[i] = s.tree.parent(i);
    pb.p[i] = s.source_probs[i];
    pb.imp[i] = &s.importance[i - 1];
    pb.q[i] = s.success_prob[i - 1];
    for (int32_t j = 0; j <= n; ++j) {
      pb.c0[static_cast<size_t>(i - 1) * (n + 1) + j] = s.costs.censor_cost(i, j);
      pb.c1[static_cast<size_t>(i - 1) * (n + 1) + j] = s.costs.transmit_cost(i, j);
    }
  }
  return pb;
}

// Restriction to `keep` (sorted internal ids). Source probability mass of the
// dropped nodes joins the silent epoch. Routes of kept nodes must not leave
// the kept set.
Problem restrict_problem(const Problem& pb, const std::vector<int32_t>& keep) {
  const int32_t m = static_cast<int32_t>(keep.size());
  std::vector<int32_t> to_sub(pb.n + 1, 0);
  for (int32_t k = 0; k < m; ++k) to_sub[keep[k]] = k + 1;

  Problem sub;
  sub.n = m;
  sub.ids.resize(m + 1);
  sub.parent.resize(m + 1);
  sub.p.resize(m + 1);
  sub.imp.assign(m + 1, nullptr);
  sub.q.assign(m + 1, 1.0);
  sub.c0.resize(static_cast<size_t>(m) * (m + 1));
  sub.c1.resize(static_cast<size_t>(m) * (m + 1));
  sub.ids[0] = 0;
  sub.parent[0] = 0;

  double kept_mass = 0.0;
  for (int32_t k = 1; k <= m; ++k) {
    const int32_t orig = keep[k - 1];
    sub.ids[k] = pb.ids[orig];
    const int32_t par = pb.parent[orig];
    if (par != 0 && to_sub[par] == 0)
      fail(errc::invalid_argument, "restricted node set is not closed under routing");
    sub.parent[k] = par == 0 ? 0 : to_sub[par];
    sub.p[k] = pb.p[orig];
    kept_mass += pb.p[orig];
    sub.imp[k] = pb.imp[orig];
    sub.q[k] = pb.q[orig];
    sub.c0[static_cast<size_t>(k - 1) * (m + 1)] = pb.cost0(orig, 0);
    sub.c1[static_cast<size_t>(k - 1) * (m + 1)] = pb.cost1(orig, 0);
    for (int32_t jj = 1; jj <= m; ++jj) {
      sub.c0[static_cast<size_t>(k - 1) * (m + 1) + jj] = pb.cost0(orig, keep[jj - 1]);
      sub.c1[static_cast<size_t>(k - 1) * (m + 1) + jj] = pb.cost1(orig, keep[jj - 1]);
    }
  }
  sub.p[0] = std::max(0.0, 1.0 - kept_mass);
  return sub;
}

// Transmit probability per source under constant thresholds. F[0] = 0.
std::vector<double> transmit_rates(const Problem& pb, const std::vector<double>& mu) {
  std::vector<double> f(pb.n + 1, 0.0);
  for (int32_t j = 1; j <= pb.n; ++j) {
    const double qj = pb.q[j];
    if (qj > 0.0)
      f[j] = pb.imp[j]->tail(mu[j] / qj);
    else
      f[j] = mu[j] <= 0.0 ? 1.0 : 0.0;
  }
  return f;
}

std::vector<double> drain_rates(const Problem& pb, const std::vector<double>& f) {
  std::vector<double> g(pb.n + 1, 0.0);
  for (int32_t i = 1; i <= pb.n; ++i) {
    double s = 0.0;
    for (int32_t j = 0; j <= pb.n; ++j)
      s += pb.p[j] * (static_cast<double>(pb.cost0(i, j)) + pb.delta(i, j) * f[j]);
    g[i] = s;
  }
  return g;
}

std::vector<double> lifetimes_from(const std::vector<double>& e, const std::vector<double>& g,
                                   int32_t n) {
  std::vector<double> t(n + 1, kInf);
  for (int32_t i = 1; i <= n; ++i) t[i] = g[i] > 0.0 ? e[i] / g[i] : kInf;
  return t;
}

int32_t argmin_lifetime(const std::vector<double>& t, int32_t n) {
  int32_t best = 0;
  for (int32_t i = 1; i <= n; ++i)
    if (std::isfinite(t[i]) && (best == 0 || t[i] < t[best])) best = i;
  return best;  // 0 when every lifetime is infinite
}

double solve_slope_internal(const Problem& pb, int32_t node, double alpha,
                            const std::vector<double>& beta, double tol, int* clamped) {
  const double cbar = pb.cbar(node);
  if (!(cbar > 0.0))
    fail(errc::degenerate, "node " + std::to_string(pb.ids[node]) +
                               " has zero expected censor-side cost; slope equation is singular");

  double rhs0 = 0.0;
  for (int32_t j = 1; j <= pb.n; ++j)
    if (pb.p[j] > 0.0) rhs0 += pb.p[j] * pb.excess(j, beta[j]);

  if (alpha >= rhs0) {
    if (clamped) ++*clamped;
    return 0.0;
  }

  const auto f = [&](double w) {
    double rhs = 0.0;
    for (int32_t j = 1; j <= pb.n; ++j)
      if (pb.p[j] > 0.0) rhs += pb.p[j] * pb.excess(j, pb.delta(node, j) * w + beta[j]);
    return cbar * w + alpha - rhs;
  };

  double lo = 0.0, hi = rhs0 / cbar;  // f(lo) < 0 <= f(hi)
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct StepOut {
  std::vector<double> w, mu;           // size n+1
  std::vector<int32_t> disconnected, surviving;  // internal ids, ascending
  int clamped = 0;
};

struct IterationState {
  int32_t critical = 0;
  double lifetime = 0.0;
  StepOut step;
  std::vector<double> mu;  // == step.mu, kept for cycle detection
};

StepOut solve_problem(const Problem& pb, const std::vector<double>& energy,
                      const SolveOptions& options, std::string& trace, int depth,
                      int32_t* critical_out, double* lifetime_out, int* iterations_out,
                      bool* oscillation_out);

// Thresholds for a known critical node: slopes of the surviving subnetwork
// first (on its post-depletion energy projection), then the scalar solve at
// the critical node, zero on the disconnected set.
StepOut thresholds_step(const Problem& pb, int32_t critical, double critical_lifetime,
                        const std::vector<double>& rates, const std::vector<double>& energy,
                        const SolveOptions& options, std::string& trace, int depth) {
  const int32_t n = pb.n;
  StepOut out;
  out.w.assign(n + 1, 0.0);
  out.mu.assign(n + 1, 0.0);

  for (int32_t j = 1; j <= n; ++j) {
    if (j == critical) continue;
    (pb.routes_through(critical, j) ? out.disconnected : out.surviving).push_back(j);
  }

  double alpha = 0.0;
  std::vector<double> beta(n + 1, 0.0);
  if (!out.surviving.empty()) {
    const auto& surv = out.surviving;
    // Energy left at the surviving nodes when the critical node depletes,
    // discounted at the rates of the surviving traffic only.
    std::vector<double> sub_energy(surv.size() + 1, 0.0);
    for (size_t k = 0; k < surv.size(); ++k) {
      const int32_t s = surv[k];
      double gs = pb.p[0] * static_cast<double>(pb.cost0(s, 0));
      for (const int32_t j : surv)
        gs += pb.p[j] * (static_cast<double>(pb.cost0(s, j)) + pb.delta(s, j) * rates[j]);
      sub_energy[k + 1] = std::max(0.0, energy[s] - critical_lifetime * gs);
    }

    Problem sub = restrict_problem(pb, surv);
    StepOut subres = solve_problem(sub, sub_energy, options, trace, depth + 1, nullptr, nullptr,
                                   nullptr, nullptr);
    out.clamped += subres.clamped;

    for (size_t k = 0; k < surv.size(); ++k) {
      const int32_t s = surv[k];
      const double ws = subres.w[k + 1];
      out.w[s] = ws;
      alpha += pb.cbar(s) * ws;
      for (int32_t j = 1; j <= n; ++j) beta[j] += pb.delta(s, j) * ws;
    }
  }

  out.w[critical] =
      solve_slope_internal(pb, critical, alpha, beta, options.bisect_tolerance, &out.clamped);

  for (int32_t j = 1; j <= n; ++j) {
    double m = 0.0;
    for (int32_t i = 1; i <= n; ++i) m += pb.delta(i, j) * out.w[i];
    out.mu[j] = m;
  }
  return out;
}

std::string format_mu(const Problem& pb, const std::vector<double>& mu) {
  std::ostringstream os;
  os << "[";
  for (int32_t j = 1; j <= pb.n; ++j) {
    if (j > 1) os << ", ";
    os << pb.ids[j] << ":" << mu[j];
  }
  os << "]";
  return os.str();
}

// Fixed-point loop: identify the critical node under the current thresholds,
// recompute the thresholds for it, repeat until both stabilize.
StepOut solve_problem(const Problem& pb, const std::vector<double>& energy,
                      const SolveOptions& options, std::string& trace, int depth,
                      int32_t* critical_out, double* lifetime_out, int* iterations_out,
                      bool* oscillation_out) {
  const int32_t n = pb.n;
  std::vector<double> mu(n + 1, 0.0);
  IterationState prev1, prev2;
  const std::string indent(static_cast<size_t>(depth) * 2, ' ');

  const auto close = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (int32_t j = 1; j <= n; ++j) d = std::max(d, std::abs(a[j] - b[j]));
    return d <= options.tolerance;
  };

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const auto rates = transmit_rates(pb, mu);
    const auto g = drain_rates(pb, rates);
    const auto t = lifetimes_from(energy, g, n);
    const int32_t crit = argmin_lifetime(t, n);
    if (crit == 0)
      fail(errc::degenerate, "no node ever depletes; critical node is undefined");

    StepOut step = thresholds_step(pb, crit, t[crit], rates, energy, options, trace, depth);

    trace += indent + "iter " + std::to_string(iter) + ": critical=" +
             std::to_string(pb.ids[crit]) + " T=" + std::to_string(t[crit]) +
             " mu=" + format_mu(pb, step.mu) + "\n";

    if (close(step.mu, mu)) {
      // Confirm the partition is a fixed point under the returned thresholds.
      const auto rates2 = transmit_rates(pb, step.mu);
      const auto g2 = drain_rates(pb, rates2);
      const auto t2 = lifetimes_from(energy, g2, n);
      if (argmin_lifetime(t2, n) == crit) {
        if (critical_out) *critical_out = crit;
        if (lifetime_out) *lifetime_out = t2[crit];
        if (iterations_out) *iterations_out = iter;
        return step;
      }
    }

    if (prev2.critical != 0 && crit == prev2.critical && close(step.mu, prev2.mu) &&
        crit != prev1.critical) {
      // Two-cycle between partitions: return the iterate whose critical node
      // dies sooner and flag the oscillation.
      IterationState current{crit, t[crit], std::move(step), {}};
      current.mu = current.step.mu;
      const IterationState& pick = current.lifetime <= prev1.lifetime ? current : prev1;
      trace += indent + "oscillation: critical alternates " + std::to_string(pb.ids[crit]) +
               "/" + std::to_string(pb.ids[prev1.critical]) + ", keeping " +
               std::to_string(pb.ids[pick.critical]) + "\n";
      if (critical_out) *critical_out = pick.critical;
      if (lifetime_out) *lifetime_out = pick.lifetime;
      if (iterations_out) *iterations_out = iter;
      if (oscillation_out) *oscillation_out = true;
      return pick.step;
    }

    prev2 = std::move(prev1);
    prev1.critical = crit;
    prev1.lifetime = t[crit];
    prev1.mu = step.mu;
    prev1.step = std::move(step);
    mu = prev1.mu;
  }

  fail(errc::no_convergence,
       "threshold iteration did not converge after " + std::to_string(options.max_iterations) +
           " iterations\n" + trace);
}

Result finish_result(const Problem& pb, const std::vector<double>& energy, StepOut step,
                     int32_t crit, int iterations, bool oscillation, std::string trace,
                     const SolveOptions& options, int32_t full_n) {
  Result res;
  res.mu.assign(full_n, 0.0);
  res.w.assign(full_n, 0.0);
  res.lifetime.assign(full_n, kInf);
  res.consumption.assign(full_n, 0.0);

  const auto rates = transmit_rates(pb, step.mu);
  const auto g = drain_rates(pb, rates);
  const auto t = lifetimes_from(energy, g, pb.n);

  for (int32_t j = 1; j <= pb.n; ++j) {
    const int32_t id = pb.ids[j];
    res.mu[id - 1] = step.mu[j];
    res.w[id - 1] = step.w[j];
    res.lifetime[id - 1] = t[j];
    res.consumption[id - 1] = g[j];
  }
  res.critical = pb.ids[crit];
  res.critical_lifetime = t[crit];
  for (const int32_t d : step.disconnected) res.disconnected.push_back(pb.ids[d]);
  for (const int32_t s : step.surviving) res.surviving.push_back(pb.ids[s]);
  std::sort(res.disconnected.begin(), res.disconnected.end());
  std::sort(res.surviving.begin(), res.surviving.end());
  res.iterations = iterations;
  res.oscillation = oscillation;
  res.clamped_roots = step.clamped;
  res.trace = std::move(trace);

  for (int32_t i = 1; i <= pb.n; ++i) {
    int64_t worst = 0;
    for (int32_t j = 0; j <= pb.n; ++j) worst = std::max(worst, pb.cost1(i, j));
    if (worst > 0 && energy[i] < options.validity_floor * static_cast<double>(worst))
      res.low_energy_warning = true;
  }
  return res;
}

Result solve_on_problem(const Problem& pb, const std::vector<double>& energy,
                        const SolveOptions& options, int32_t full_n) {
  for (int32_t i = 1; i <= pb.n; ++i)
    if (!(energy[i] >= 0.0)) fail(errc::invalid_argument, "energies must be >= 0");

  std::string trace;
  int32_t crit = 0;
  double lifetime = 0.0;
  int iterations = 0;
  bool oscillation = false;
  StepOut step =
      solve_problem(pb, energy, options, trace, 0, &crit, &lifetime, &iterations, &oscillation);
  return finish_result(pb, energy, std::move(step), crit, iterations, oscillation,
                       std::move(trace), options, full_n);
}

}  // namespace

LifetimeEstimate stationary_lifetimes(const Scenario& s, const std::vector<double>& mu,
                                      const std::vector<double>& energy) {
  const int32_t n = s.node_count();
  if (mu.size() != static_cast<size_t>(n) || energy.size() != static_cast<size_t>(n))
    fail(errc::invalid_argument, "mu and energy must have one entry per node");

  const Problem pb = problem_from_scenario(s);
  std::vector<double> mu1(n + 1, 0.0);
  std::vector<double> e1(n + 1, 0.0);
  for (int32_t i = 1; i <= n; ++i) {
    mu1[i] = mu[i - 1];
    e1[i] = energy[i - 1];
  }
  const auto g = drain_rates(pb, transmit_rates(pb, mu1));
  const auto t = lifetimes_from(e1, g, n);

  LifetimeEstimate out;
  out.lifetime.assign(t.begin() + 1, t.end());
  out.consumption.assign(g.begin() + 1, g.end());
  return out;
}

std::pair<int32_t, double> critical_node(const LifetimeEstimate& estimate) {
  const int32_t n = static_cast<int32_t>(estimate.lifetime.size());
  int32_t best = 0;
  for (int32_t i = 1; i <= n; ++i) {
    const double t = estimate.lifetime[i - 1];
    if (std::isfinite(t) && (best == 0 || t < estimate.lifetime[best - 1])) best = i;
  }
  if (best == 0) fail(errc::degenerate, "every stationary lifetime is infinite");
  return {best, estimate.lifetime[best - 1]};
}

std::pair<std::vector<int32_t>, std::vector<int32_t>> split_graph(const RoutingTree& tree,
                                                                  int32_t node) {
  if (node < 1 || node > tree.node_count()) fail(errc::invalid_argument, "node out of range");
  std::vector<int32_t> disconnected = tree.descendants(node);
  std::vector<int32_t> surviving;
  for (int32_t j = 1; j <= tree.node_count(); ++j)
    if (j != node && !tree.routes_through(node, j)) surviving.push_back(j);
  return {std::move(disconnected), std::move(surviving)};
}

double solve_node_slope(const Scenario& s, int32_t node, double alpha,
                        const std::vector<double>& beta, double tol) {
  const int32_t n = s.node_count();
  if (node < 1 || node > n) fail(errc::invalid_argument, "node out of range");
  if (beta.size() != static_cast<size_t>(n))
    fail(errc::invalid_argument, "beta must have one entry per source");
  const Problem pb = problem_from_scenario(s);
  std::vector<double> beta1(n + 1, 0.0);
  for (int32_t j = 1; j <= n; ++j) beta1[j] = beta[j - 1];
  return solve_slope_internal(pb, node, alpha, beta1, tol, nullptr);
}

ThresholdsOut thresholds(const Scenario& s, int32_t critical, double critical_lifetime,
                         const std::vector<double>& mu_current, const std::vector<double>& energy,
                         const SolveOptions& options) {
  const int32_t n = s.node_count();
  if (critical < 1 || critical > n) fail(errc::invalid_argument, "critical node out of range");
  if (mu_current.size() != static_cast<size_t>(n) || energy.size() != static_cast<size_t>(n))
    fail(errc::invalid_argument, "mu and energy must have one entry per node");

  const Problem pb = problem_from_scenario(s);
  std::vector<double> mu1(n + 1, 0.0);
  std::vector<double> e1(n + 1, 0.0);
  for (int32_t i = 1; i <= n; ++i) {
    mu1[i] = mu_current[i - 1];
    e1[i] = energy[i - 1];
  }
  std::string trace;
  StepOut step = thresholds_step(pb, critical, critical_lifetime, transmit_rates(pb, mu1), e1,
                                 options, trace, 0);
  ThresholdsOut out;
  out.w.assign(step.w.begin() + 1, step.w.end());
  out.mu.assign(step.mu.begin() + 1, step.mu.end());
  out.disconnected = std::move(step.disconnected);
  out.surviving = std::move(step.surviving);
  std::sort(out.disconnected.begin(), out.disconnected.end());
  std::sort(out.surviving.begin(), out.surviving.end());
  out.clamped_roots = step.clamped;
  return out;
}

Result solve(const Scenario& s, const std::vector<double>& energy, const SolveOptions& options) {
  const int32_t n = s.node_count();
  if (energy.size() != static_cast<size_t>(n))
    fail(errc::invalid_argument, "energy must have one entry per node");
  const Problem pb = problem_from_scenario(s);
  std::vector<double> e1(n + 1, 0.0);
  for (int32_t i = 1; i <= n; ++i) e1[i] = energy[i - 1];
  return solve_on_problem(pb, e1, options, n);
}

Result solve_restricted(const Scenario& s, const std::vector<uint8_t>& active,
                        const std::vector<double>& energy, const SolveOptions& options) {
  const int32_t n = s.node_count();
  if (active.size() != static_cast<size_t>(n) || energy.size() != static_cast<size_t>(n))
    fail(errc::invalid_argument, "active and energy must have one entry per node");

  std::vector<int32_t> keep;
  for (int32_t i = 1; i <= n; ++i)
    if (active[i - 1]) keep.push_back(i);
  if (keep.empty()) fail(errc::invalid_argument, "no active nodes");

  const Problem full = problem_from_scenario(s);
  Problem pb = restrict_problem(full, keep);
  std::vector<double> e1(pb.n + 1, 0.0);
  for (int32_t k = 1; k <= pb.n; ++k) e1[k] = energy[keep[k - 1] - 1];
  return solve_on_problem(pb, e1, options, n);
}

}  // namespace censornet::asymptotic
