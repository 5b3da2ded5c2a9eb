#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace ssmabc {

/**
 * @brief Seeded 64-bit generator addressed by (seed, stream_id).
 *
 * The state of a xoshiro256** generator is derived from the pair through
 * SplitMix64, so each draw index of an ABC run owns an independent stream and
 * the output of a run does not depend on how draws are scheduled on threads.
 * Satisfies UniformRandomBitGenerator, so <random> distributions accept it.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_(*this); }

  /// Exponential with unit rate.
  double exponential() { return -std::log(uniform()); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4];
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace ssmabc
