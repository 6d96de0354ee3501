#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace switchadj {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64-based key derivation: folds an ordered list of identifiers
/// into a single 64-bit key. Distinct tuples give unrelated keys.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

/*!
 * Counter-based random stream.
 *
 * The stream is addressed by a 64-bit key and a 64-bit stream id; the
 * remaining 64 counter bits enumerate blocks. Two streams with different
 * (key, stream id) never overlap, and the output of a stream does not depend
 * on how many other streams were consumed before it.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class random_stream {
public:
  using result_type = std::uint32_t;

  random_stream(std::uint64_t key, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Beta(a, b) via the ratio of gamma variates.
  double beta(double a, double b);

private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  unsigned lane_ = 4;
  std::array<std::uint32_t, 4> buffer_{};
};

}  // namespace switchadj
