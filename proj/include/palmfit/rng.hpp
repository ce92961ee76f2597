#pragma once

#include <array>
#include <cstdint>

namespace palmfit {

// Deterministic random stream keyed by (seed, stream). The same key always
// reproduces the same draw sequence, bit for bit, on every platform; distinct
// stream ids give statistically independent sequences. xoshiro256** state is
// derived from the key via splitmix64. All distribution samplers below avoid
// <random> distributions, whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Independent child stream; used to hand one stream per work unit
  // (replicate, image, bootstrap draw) so results do not depend on the
  // parallel schedule.
  RngStream substream(std::uint64_t id) const;

  std::uint64_t next_u64();

  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  std::uint64_t uniform_index(std::uint64_t n);  // {0, ..., n-1}

  // Box-Muller; the spare deviate is cached so pairs are consumed in order.
  double normal(double mean = 0.0, double sd = 1.0);

  // Exponential inter-arrival counting: exact for any mean, O(mean) draws.
  std::uint64_t poisson(double mean);

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace palmfit
