#include "importance.hpp"

#include <cmath>
#include <limits>

#include "error.hpp"

namespace censornet {

ImportanceModel ImportanceModel::exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean))
    fail(errc::invalid_argument, "exponential importance requires mean > 0");
  ImportanceModel m;
  m.kind_ = Kind::exponential;
  m.mean_ = mean;
  return m;
}

ImportanceModel ImportanceModel::discrete(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    fail(errc::invalid_argument, "discrete importance requires matching non-empty values/probs");
  double sum = 0.0;
  for (size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= 0.0) || !std::isfinite(values[k]))
      fail(errc::invalid_argument, "discrete importance values must be finite and >= 0");
    if (!(probs[k] >= 0.0))
      fail(errc::invalid_argument, "discrete importance probabilities must be >= 0");
    sum += probs[k];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    fail(errc::invalid_argument, "discrete importance probabilities must sum to 1");
  ImportanceModel m;
  m.kind_ = Kind::discrete;
  m.values_ = std::move(values);
  m.probs_ = std::move(probs);
  return m;
}

double ImportanceModel::mean() const {
  if (kind_ == Kind::exponential) return mean_;
  double s = 0.0;
  for (size_t k = 0; k < values_.size(); ++k) s += values_[k] * probs_[k];
  return s;
}

double ImportanceModel::tail(double t) const {
  if (t <= 0.0) return 1.0;
  if (kind_ == Kind::exponential) return std::exp(-t / mean_);
  double s = 0.0;
  for (size_t k = 0; k < values_.size(); ++k)
    if (values_[k] >= t) s += probs_[k];
  return s;
}

double ImportanceModel::partial_expectation(double t) const {
  if (kind_ == Kind::exponential) {
    if (t <= 0.0) return mean_ - t;
    return mean_ * std::exp(-t / mean_);
  }
  double s = 0.0;
  for (size_t k = 0; k < values_.size(); ++k) {
    const double excess = values_[k] - t;
    if (excess > 0.0) s += probs_[k] * excess;
  }
  return s;
}

double ImportanceModel::sample(CounterRng& rng) const {
  const double u = rng.next_double();
  if (kind_ == Kind::exponential) return -mean_ * std::log1p(-u);
  double cum = 0.0;
  for (size_t k = 0; k < values_.size(); ++k) {
    cum += probs_[k];
    if (u < cum) return values_[k];
  }
  return values_.back();
}

}  // namespace censornet
