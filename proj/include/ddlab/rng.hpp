#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ddlab {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// 64-bit FNV-1a hash of a string.
std::uint64_t hash_string(std::string_view s) noexcept;

/// Hash a master seed together with an ordered list of keys. Distinct key
/// lists give statistically independent streams; the result depends only on
/// the values, so per-trial streams do not depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept;

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(master, keys));
}

/// Bit pattern of a double, for use as a seed key.
std::uint64_t double_key(double v) noexcept;

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace ddlab
