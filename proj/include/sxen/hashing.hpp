#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "sxen/lattice.hpp"

namespace sxen {

/// Per-axis multipliers of the spatial hash. The first is 1 so that on a
/// coarse level whose vertex count fits the table, the x axis indexes
/// densely and collision-free. Axes 1..6 use the customary large primes;
/// axis 7 extends the set with the largest 32-bit prime.
inline constexpr std::array<std::uint32_t, kMaxDim> kHashPrimes = {
    1u,          2654435761u, 805459861u, 3674653429u,
    2097192037u, 1434869437u, 2165219737u, 4294967291u};

constexpr bool is_power_of_two(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

/// Raw prime-multiply-XOR hash of integer lattice coordinates (unreduced).
inline std::uint32_t hash_coords(std::span<const std::int64_t> coords) {
  std::uint32_t h = 0;
  for (size_t i = 0; i < coords.size(); ++i) {
    h ^= static_cast<std::uint32_t>(static_cast<std::uint64_t>(coords[i])) * kHashPrimes[i];
  }
  return h;
}

/// Hash-table index of an integer lattice vertex: the raw hash reduced
/// modulo the power-of-two table size by bitmask.
inline std::uint32_t hash_index(std::span<const std::int64_t> coords, std::uint32_t table_size) {
  if (!is_power_of_two(table_size)) {
    throw std::invalid_argument("table size must be a power of two");
  }
  if (coords.empty() || coords.size() > static_cast<size_t>(kMaxDim)) {
    throw std::invalid_argument("hash_index: coordinate count out of range");
  }
  return hash_coords(coords) & (table_size - 1u);
}

}  // namespace sxen
