#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace cts {

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// SplitMix64 finalizer; a bijective avalanche mix of one 64-bit word.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for an independent named stream derived from a run seed. Changing the
/// work done in one stream never perturbs another.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index) noexcept;

/// Seeded generator with platform-independent draws.
///
/// std::mt19937_64 output is fixed by the standard but the std::*_distribution
/// adaptors are not, so every draw is derived from raw engine words here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal (polar method, one cached spare).
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cts
