#pragma once

#include <vector>

#include "rng.hpp"

namespace censornet {

// Distribution of the message importance x >= 0. The solvers only need two
// statistics of it: the survival function P(x >= t) and the expected excess
// E{(x - t)^+}; both have closed forms for the supported families.
class ImportanceModel {
 public:
  enum class Kind { exponential, discrete };

  static ImportanceModel exponential(double mean);
  static ImportanceModel discrete(std::vector<double> values, std::vector<double> probs);

  Kind kind() const { return kind_; }
  double mean() const;

  // P(x >= t). Non-increasing in t, equals 1 for t <= 0.
  double tail(double t) const;

  // E{(x - t)^+}. Non-increasing and convex in t, equals mean() at t = 0.
  double partial_expectation(double t) const;

  double sample(CounterRng& rng) const;

  bool operator==(const ImportanceModel&) const = default;

  double exponential_mean() const { return mean_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  ImportanceModel() = default;

  Kind kind_ = Kind::exponential;
  double mean_ = 1.0;
  std::vector<double> values_, probs_;  // discrete only
};

}  // namespace censornet
