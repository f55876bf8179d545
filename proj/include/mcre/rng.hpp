#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace mcre {

// Philox4x64-10 block function (Salmon et al., Random123).
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// Counter-based generator keyed by (seed, stream). Word `step` of a stream is
/// a pure function of (seed, stream, step), so replicas can be generated in any
/// order or concurrently and still reproduce bit-for-bit.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Index i drawn with probability weights[i] / sum(weights). Inverse CDF.
  std::size_t discrete(std::span<const double> weights);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  unsigned used_ = 4;
};

// Stream id for a (group, index) pair, e.g. (grid cell, replica).
constexpr std::uint64_t stream_id(std::uint32_t group, std::uint32_t index) {
  return (static_cast<std::uint64_t>(group) << 32) | index;
}

}  // namespace mcre
