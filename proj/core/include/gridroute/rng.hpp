#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gridroute {

/// Seeded generator with platform-independent draws: std::mt19937_64 for
/// the bit stream (its output sequence is fixed by the standard), and
/// hand-rolled bounded/real/normal transforms instead of the
/// implementation-defined std distributions.
class Rng {
public:
  static constexpr const char* kAlgorithm = "mt19937_64+lemire+box-muller/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Unbiased integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Double in [0, 1) with 53 random bits.
  double uniform01();

  double normal();

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finaliser of (base, stream); used to derive independent
/// sub-seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace gridroute
