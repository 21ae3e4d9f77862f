#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sxen/encoding.hpp"

namespace sxen {

struct UtilizationReport {
  int n = 0;
  int level = 0;  // lattice resolution under test
  std::uint64_t samples = 0;
  double estimate_pct = 0.0;
  double bound_pct = 0.0;  // analytic lower bound, volume_ratio(n) * 100

  friend bool operator==(const UtilizationReport&, const UtilizationReport&) = default;
};

struct KernelBenchReport {
  int n = 0;
  Backend backend = Backend::simplex;
  std::uint64_t cells = 0;  // effective cell count, side^n
  int samples = 0;
  int reps = 0;  // actual repetitions timed (raised if the timer under-resolves)
  double seconds = 0.0;
  double vertices_per_sample = 0.0;

  friend bool operator==(const KernelBenchReport&, const KernelBenchReport&) = default;
};

/// Fraction of a dense axis-aligned table a simplex lattice can utilize:
/// 1/V with V = (n+1)^((n-1)/2), the parallelepiped-to-cube volume ratio.
double volume_ratio(int n);

/// Same quantity via the geometry itself: scales the identity by S_n,
/// unskews each column, and returns the reciprocal of |det|.
double volume_ratio_via_determinant(int n);

/// Monte-Carlo memory-utilization estimate: uniform samples through the
/// full simplex lookup pipeline at one level, counting distinct touched
/// lattice vertices against all (level+1)^n vertices of the bounding box of
/// the scaled, skewed domain. Slightly underestimates at high resolution
/// for finite samples. Throws std::invalid_argument when the vertex
/// universe exceeds 2^33 (the dense visit-set would not fit in memory).
UtilizationReport utilization_estimate(int n, int level, std::uint64_t sample_count,
                                       std::uint64_t seed);

struct KernelBenchConfig {
  int n = 3;
  std::uint64_t cells = 1ull << 21;  // desk-scale default; the full protocol uses 2^27
  int samples = 1 << 10;
  int reps = 1000;
  Backend backend = Backend::simplex;
  std::uint32_t table_size = 1u << 19;
  int features = 2;
  std::uint64_t seed = 99;
};

/// Times the encode hot loop (hash + fetch + interpolate) over reps x
/// samples lookups on a single level whose resolution is the largest side
/// with side^n <= cells. Sample generation and table setup stay outside the
/// timed region. If the total time under-resolves the timer (< 1 ms), reps
/// are raised and the run repeats; the report carries the reps actually
/// timed. Touched-vertex counts come from exact instrumentation counters.
KernelBenchReport bench_kernel(const KernelBenchConfig& cfg);

/// CSV emit/parse with stable column order; parsing rejects unknown
/// headers. Floating-point columns round-trip bit-exactly.
void write_utilization_csv(const std::string& path, std::span<const UtilizationReport> rows);
std::vector<UtilizationReport> read_utilization_csv(const std::string& path);
void write_kernel_csv(const std::string& path, std::span<const KernelBenchReport> rows);
std::vector<KernelBenchReport> read_kernel_csv(const std::string& path);

/// Plot-ready JSON mirrors of the CSV rows.
void write_utilization_json(const std::string& path, std::span<const UtilizationReport> rows);
void write_kernel_json(const std::string& path, std::span<const KernelBenchReport> rows);

}  // namespace sxen
