#pragma once

#include <array>
#include <cstdint>

namespace chemostat {

/// Philox4x32-10 block function: a keyed bijection of 128-bit counters.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Per-path seed as a counter-based function of (base_seed, path index).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

/// Random stream keyed by (seed, stream id); draw k is a pure function of
/// (seed, stream id, k), so results never depend on thread scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Exp(1).
  double exponential();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  std::uint64_t next_u64();

  std::uint64_t draws() const { return block_ * 2 + slot_ - 2; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  unsigned slot_ = 2;
  std::array<std::uint32_t, 4> buf_{};
};

}  // namespace chemostat
