#pragma once

#include <array>
#include <cstdint>

namespace synth {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel Random
/// Numbers: As Easy as 1, 2, 3", SC'11).
///
/// The key is (seed, stream): every (seed, stream) pair indexes an
/// independent stream of 2^66 32-bit words, and a generator can be
/// reconstructed at any point from (seed, stream, position). Streams for
/// replications, chains, and units are derived with derive_stream(), so
/// Monte-Carlo results do not depend on execution order or thread count.
///
/// Integer output is bit-portable. The double-valued helpers (uniform,
/// normal) are deterministic for a given libm; Box-Muller uses log/cos/sin
/// whose last-bit rounding is the only platform-dependent part.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    stream_[0] = static_cast<std::uint32_t>(stream);
    stream_[1] = static_cast<std::uint32_t>(stream >> 32);
  }

  std::uint32_t next_u32() {
    if (idx_ == 4) refill();
    return block_[idx_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe to pass to log().
  double uniform_pos() { return 1.0 - uniform(); }

  /// Uniform integer in [0, bound), bound >= 1 (fixed-point multiply).
  std::uint64_t integer(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  void refill();

  std::uint32_t key_[2];
  std::uint32_t stream_[2];
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int idx_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stable child-stream derivation (splitmix64 finalizer over base and index).
std::uint64_t derive_stream(std::uint64_t base, std::uint64_t index);

}  // namespace synth
