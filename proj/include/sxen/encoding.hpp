#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "sxen/lattice.hpp"

namespace sxen {

enum class Backend { simplex, grid };
enum class LevelScale { raw, equal_memory };

const char* to_string(Backend b);
const char* to_string(LevelScale s);

struct EncoderConfig {
  int dim = 2;                    // n, input dimension
  int levels = 8;                 // L
  std::uint32_t table_size = 1u << 16;  // T, entries per level, power of two
  int features = 2;               // F, feature width per level
  int base_resolution = 16;       // coarsest lattice resolution
  double growth = 2.0;            // per-level geometric growth factor
  Backend backend = Backend::simplex;
  LevelScale level_scale = LevelScale::raw;

  int encoded_width() const { return levels * features; }

  /// Throws std::invalid_argument with an actionable message on any
  /// out-of-range field or on a finest resolution past 2^26.
  void validate() const;
};

/// Level-resolution multiplier (n+1)^((n-1)/(2n)) that equalizes the
/// simplex backend's stored-vertex footprint with the grid baseline's.
double equal_memory_multiplier(int n);

/// Lattice resolution of one level: floor(N_base * growth^level), times
/// the equal-memory multiplier when that mode is active on the simplex
/// backend (it is a no-op multiplier 1 for the grid backend).
std::uint32_t level_resolution(const EncoderConfig& cfg, int level);

struct LookupCounters {
  std::uint64_t touched_vertices = 0;
  std::uint64_t out_of_bounds = 0;
};

/// Sparse per-level gradient accumulator for hash-table entries. Values are
/// held in a dense 64-bit buffer so repeated touches of one entry sum
/// exactly; the touched-index list keeps iteration proportional to the
/// entries actually visited in the forward pass.
class EncoderGradient {
 public:
  EncoderGradient() = default;
  EncoderGradient(int levels, std::uint32_t table_size, int features) {
    reset(levels, table_size, features);
  }

  void reset(int levels, std::uint32_t table_size, int features);

  /// Zeroes touched slots; O(touched), not O(table).
  void clear();

  void add(int level, std::uint32_t index, double scale, std::span<const double> upstream_slice);

  /// Accumulates another gradient, preserving its touch order.
  void merge(const EncoderGradient& other);

  std::span<const std::uint32_t> touched(int level) const { return touched_[static_cast<size_t>(level)]; }
  std::span<const double> slice(int level, std::uint32_t index) const {
    return {accum_[static_cast<size_t>(level)].data() + static_cast<size_t>(index) * static_cast<size_t>(features_),
            static_cast<size_t>(features_)};
  }
  std::uint64_t touched_total() const;
  int levels() const { return levels_; }
  int features() const { return features_; }

 private:
  int levels_ = 0;
  int features_ = 0;
  std::uint32_t table_size_ = 0;
  std::vector<std::vector<double>> accum_;
  std::vector<std::vector<std::uint32_t>> touched_;
  std::vector<std::vector<std::uint8_t>> seen_;
};

/// Multiresolution feature encoder over a simplex or grid lattice, backed by
/// one hash table per level. Forward encoding is read-only over the tables
/// and safe to call from any number of threads.
class HashEncoder {
 public:
  explicit HashEncoder(EncoderConfig cfg);

  // Movable despite the atomic counters (their values carry over).
  HashEncoder(HashEncoder&& other) noexcept;
  HashEncoder& operator=(HashEncoder&& other) noexcept;
  HashEncoder(const HashEncoder&) = delete;
  HashEncoder& operator=(const HashEncoder&) = delete;

  const EncoderConfig& config() const { return cfg_; }
  std::uint32_t resolution(int level) const { return res_[static_cast<size_t>(level)]; }

  /// Fills every table entry uniformly in [-1e-4, 1e-4].
  void init_tables(std::uint64_t seed);

  std::span<float> table(int level) { return tables_[static_cast<size_t>(level)]; }
  std::span<const float> table(int level) const { return tables_[static_cast<size_t>(level)]; }
  std::uint64_t parameter_count() const;

  /// Encodes a point of the unit cube into levels*features values, the
  /// concatenation of each level's interpolated feature vector.
  void encode(std::span<const double> x, std::span<float> out) const;

  /// Accumulates d(loss)/d(table entry) for one sample: each touched
  /// vertex receives its interpolation weight times the upstream slice of
  /// its level. The encoding is linear in the entries, so weights are
  /// constants here.
  void encode_backward(std::span<const double> x, std::span<const double> upstream,
                       EncoderGradient& grad) const;

  LookupCounters counters() const {
    return {touched_.load(std::memory_order_relaxed), oob_.load(std::memory_order_relaxed)};
  }
  void reset_counters() const {
    touched_.store(0, std::memory_order_relaxed);
    oob_.store(0, std::memory_order_relaxed);
  }

 private:
  struct LevelLookup {
    int count = 0;
    std::array<std::uint32_t, 1 << kMaxDim> index;
    std::array<double, 1 << kMaxDim> weight;
  };

  void gather_simplex(int level, std::span<const double> x, LevelLookup& out) const;
  void gather_grid(int level, std::span<const double> x, LevelLookup& out) const;
  void gather(int level, std::span<const double> x, LevelLookup& out) const;
  void check_input(std::span<const double> x) const;

  EncoderConfig cfg_;
  SkewConstants sc_;
  std::vector<std::uint32_t> res_;
  std::vector<std::vector<float>> tables_;
  mutable std::atomic<std::uint64_t> touched_{0};
  mutable std::atomic<std::uint64_t> oob_{0};
};

}  // namespace sxen
