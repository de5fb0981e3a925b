#pragma once

#include <cstdint>

namespace censornet {

// Counter-based generator: output k is a pure function of (key, k), so a
// stream can be reproduced from its key alone. Streams for replications and
// topologies are derived with derive(), which makes results independent of
// execution order and thread schedule.
class CounterRng {
 public:
  explicit CounterRng(uint64_t key) : key_(key) {}

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  // Key of the independent sub-stream `index` (replication, topology, ...).
  static uint64_t derive(uint64_t key, uint64_t index) {
    return mix((key ^ 0x9E3779B97F4A7C15ull) + 0xD1B54A32D192ED03ull * (index + 1));
  }

  uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), bound > 0. Rejection keeps it exact.
  uint64_t next_below(uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace censornet
