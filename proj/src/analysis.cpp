#include "sxen/analysis.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sxen/errors.hpp"
#include "sxen/lattice.hpp"
#include "sxen/rng.hpp"

namespace sxen {
namespace {

constexpr std::uint64_t kMaxVertexUniverse = 1ull << 33;

/// |det| by partial-pivot elimination; a is row-major n x n and is destroyed.
double abs_determinant(std::span<double> a, int n) {
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(col)]) >
          std::fabs(a[static_cast<size_t>(pivot) * static_cast<size_t>(n) + static_cast<size_t>(col)])) {
        pivot = r;
      }
    }
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(a[static_cast<size_t>(pivot) * static_cast<size_t>(n) + static_cast<size_t>(c)],
                  a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)]);
      }
    }
    const double p = a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(col)];
    if (p == 0.0) return 0.0;
    det *= p;
    for (int r = col + 1; r < n; ++r) {
      const double factor =
          a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(col)] / p;
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) {
        a[static_cast<size_t>(r) * static_cast<size_t>(n) + static_cast<size_t>(c)] -=
            factor * a[static_cast<size_t>(col) * static_cast<size_t>(n) + static_cast<size_t>(c)];
      }
    }
  }
  return std::fabs(det);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, const char* what) {
  double v = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError(std::string("csv: cannot parse ") + what + " value '" + field + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& field, const char* what) {
  std::int64_t v = 0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw IoError(std::string("csv: cannot parse ") + what + " value '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv '" + path + "' is empty");
  if (line != expected_header) {
    throw IoError("csv '" + path + "' header mismatch: expected '" + expected_header + "', got '" +
                  line + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

constexpr const char* kUtilizationHeader = "n,level,samples,estimate_pct,bound_pct";
constexpr const char* kKernelHeader = "n,backend,cells,samples,reps,seconds,vertices_per_sample";

Backend backend_from_string(const std::string& s) {
  if (s == "simplex") return Backend::simplex;
  if (s == "grid") return Backend::grid;
  throw IoError("csv: unknown backend '" + s + "'");
}

}  // namespace

double volume_ratio(int n) {
  if (n < 1) throw std::invalid_argument("volume_ratio: n must be >= 1");
  return std::pow(static_cast<double>(n + 1), -(static_cast<double>(n - 1) / 2.0));
}

double volume_ratio_via_determinant(int n) {
  if (n < 1 || n > kMaxDim) {
    throw std::invalid_argument("volume_ratio_via_determinant: n must be in [1, " +
                                std::to_string(kMaxDim) + "]");
  }
  const SkewConstants sc = SkewConstants::make(n);
  // Columns of S_n * I_n, each pushed through the unskew transform; their
  // determinant is the volume of the image of the scaled unit cube's basis.
  std::array<double, static_cast<size_t>(kMaxDim) * kMaxDim> m{};
  std::array<double, kMaxDim> col;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = i == j ? sc.scale : 0.0;
    unskew_in_place(std::span<double>(col.data(), static_cast<size_t>(n)), sc);
    for (int i = 0; i < n; ++i) {
      m[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] =
          col[static_cast<size_t>(i)];
    }
  }
  const double det = abs_determinant(std::span<double>(m.data(), static_cast<size_t>(n) * static_cast<size_t>(n)), n);
  return 1.0 / det;
}

UtilizationReport utilization_estimate(int n, int level, std::uint64_t sample_count,
                                       std::uint64_t seed) {
  if (n < 1 || n > kMaxDim) {
    throw std::invalid_argument("utilization: n must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (level < 1) throw std::invalid_argument("utilization: level must be >= 1");
  if (sample_count < 1) throw std::invalid_argument("utilization: sample_count must be >= 1");

  const auto side = static_cast<std::uint64_t>(level) + 1;  // vertices per axis, 0..level
  std::uint64_t universe = 1;
  for (int i = 0; i < n; ++i) {
    if (universe > kMaxVertexUniverse / side) {
      throw std::invalid_argument(
          "utilization: vertex universe (level+1)^n exceeds 2^33; lower the level or dimension");
    }
    universe *= side;
  }

  const SkewConstants sc = SkewConstants::make(n);
  const double s = static_cast<double>(level) / sc.scale;
  const double one_below = std::nextafter(1.0, 0.0);
  std::vector<bool> visited(universe, false);
  std::uint64_t distinct = 0;
  CounterRng rng(seed);

  // Mixed-radix vertex key: the chain vertex after incrementing axis a sits
  // exactly one stride_a higher.
  std::array<std::uint64_t, kMaxDim> stride;
  {
    std::uint64_t acc = 1;
    for (int i = 0; i < n; ++i) {
      stride[static_cast<size_t>(i)] = acc;
      acc *= side;
    }
  }

  std::array<double, kMaxDim> y;
  std::array<double, kMaxDim> fracs;
  std::array<std::int64_t, kMaxDim> base;
  const auto limit = static_cast<std::int64_t>(level);
  for (std::uint64_t it = 0; it < sample_count; ++it) {
    for (int i = 0; i < n; ++i) y[static_cast<size_t>(i)] = rng.next_double() * s;
    skew_in_place(std::span<double>(y.data(), static_cast<size_t>(n)), sc);
    for (int i = 0; i < n; ++i) {
      auto b = static_cast<std::int64_t>(std::floor(y[static_cast<size_t>(i)]));
      b = std::clamp<std::int64_t>(b, 0, limit - 1);
      base[static_cast<size_t>(i)] = b;
      fracs[static_cast<size_t>(i)] =
          std::clamp(y[static_cast<size_t>(i)] - static_cast<double>(b), 0.0, one_below);
    }
    const Subdivision sub = subdivide(std::span<const double>(fracs.data(), static_cast<size_t>(n)));

    std::uint64_t idx = 0;
    for (int i = n - 1; i >= 0; --i) {
      idx = idx * side + static_cast<std::uint64_t>(base[static_cast<size_t>(i)]);
    }
    for (int k = 0; k <= n; ++k) {
      if (k > 0) idx += stride[sub.perm[static_cast<size_t>(k - 1)]];
      if (!visited[idx]) {
        visited[idx] = true;
        ++distinct;
      }
    }
  }

  UtilizationReport report;
  report.n = n;
  report.level = level;
  report.samples = sample_count;
  report.estimate_pct = 100.0 * static_cast<double>(distinct) / static_cast<double>(universe);
  report.bound_pct = 100.0 * volume_ratio(n);
  return report;
}

KernelBenchReport bench_kernel(const KernelBenchConfig& cfg) {
  if (cfg.n < 1 || cfg.n > kMaxDim) {
    throw std::invalid_argument("bench: n must be in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (cfg.cells < 1) throw std::invalid_argument("bench: cells must be >= 1");
  if (cfg.samples < 1 || cfg.reps < 1) {
    throw std::invalid_argument("bench: samples and reps must be >= 1");
  }

  // Largest integer side with side^n <= cells, found without FP edge cases.
  auto pow_n = [&](std::uint64_t side) {
    std::uint64_t v = 1;
    for (int i = 0; i < cfg.n; ++i) {
      if (side != 0 && v > std::numeric_limits<std::uint64_t>::max() / side) return std::numeric_limits<std::uint64_t>::max();
      v *= side;
    }
    return v;
  };
  auto side = static_cast<std::uint64_t>(
      std::llround(std::pow(static_cast<double>(cfg.cells), 1.0 / cfg.n)));
  side = std::max<std::uint64_t>(side, 1);
  while (pow_n(side) > cfg.cells) --side;
  while (pow_n(side + 1) <= cfg.cells) ++side;

  EncoderConfig ec;
  ec.dim = cfg.n;
  ec.levels = 1;
  ec.table_size = cfg.table_size;
  ec.features = cfg.features;
  ec.base_resolution = static_cast<int>(side);
  ec.growth = 2.0;
  ec.backend = cfg.backend;
  ec.level_scale = LevelScale::raw;
  HashEncoder encoder(ec);
  encoder.init_tables(cfg.seed);

  CounterRng rng(cfg.seed, 1);
  std::vector<double> points(static_cast<size_t>(cfg.samples) * static_cast<size_t>(cfg.n));
  for (double& v : points) v = rng.next_double();
  std::vector<float> out(static_cast<size_t>(ec.encoded_width()));

  int reps = cfg.reps;
  double seconds = 0.0;
  for (;;) {
    encoder.reset_counters();
    double check = 0.0;
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) {
      for (int sidx = 0; sidx < cfg.samples; ++sidx) {
        encoder.encode(
            std::span<const double>(points.data() + static_cast<size_t>(sidx) * static_cast<size_t>(cfg.n),
                                    static_cast<size_t>(cfg.n)),
            out);
        check += static_cast<double>(out[0]);
      }
    }
    const auto stop = std::chrono::steady_clock::now();
    seconds = std::chrono::duration<double>(stop - start).count();
    if (!std::isfinite(check)) {
      throw std::runtime_error("bench: encode produced non-finite values");
    }
    if (seconds >= 1e-3) break;
    std::fprintf(stderr,
                 "bench-kernel: total %.3g s under-resolves the timer; raising reps %d -> %d\n",
                 seconds, reps, reps * 10);
    reps *= 10;
  }

  const std::uint64_t lookups =
      static_cast<std::uint64_t>(reps) * static_cast<std::uint64_t>(cfg.samples);
  KernelBenchReport report;
  report.n = cfg.n;
  report.backend = cfg.backend;
  report.cells = pow_n(side);
  report.samples = cfg.samples;
  report.reps = reps;
  report.seconds = seconds;
  report.vertices_per_sample =
      static_cast<double>(encoder.counters().touched_vertices) / static_cast<double>(lookups);
  return report;
}

void write_utilization_csv(const std::string& path, std::span<const UtilizationReport> rows) {
  std::string content = std::string(kUtilizationHeader) + "\n";
  for (const auto& r : rows) {
    content += std::to_string(r.n) + "," + std::to_string(r.level) + "," +
               std::to_string(r.samples) + "," + format_double(r.estimate_pct) + "," +
               format_double(r.bound_pct) + "\n";
  }
  write_text(path, content);
}

std::vector<UtilizationReport> read_utilization_csv(const std::string& path) {
  std::vector<UtilizationReport> out;
  for (const auto& fields : read_csv(path, kUtilizationHeader)) {
    if (fields.size() != 5) throw IoError("csv '" + path + "': expected 5 columns");
    UtilizationReport r;
    r.n = static_cast<int>(parse_int(fields[0], "n"));
    r.level = static_cast<int>(parse_int(fields[1], "level"));
    r.samples = static_cast<std::uint64_t>(parse_int(fields[2], "samples"));
    r.estimate_pct = parse_double(fields[3], "estimate_pct");
    r.bound_pct = parse_double(fields[4], "bound_pct");
    out.push_back(r);
  }
  return out;
}

void write_kernel_csv(const std::string& path, std::span<const KernelBenchReport> rows) {
  std::string content = std::string(kKernelHeader) + "\n";
  for (const auto& r : rows) {
    content += std::to_string(r.n) + "," + to_string(r.backend) + "," + std::to_string(r.cells) +
               "," + std::to_string(r.samples) + "," + std::to_string(r.reps) + "," +
               format_double(r.seconds) + "," + format_double(r.vertices_per_sample) + "\n";
  }
  write_text(path, content);
}

std::vector<KernelBenchReport> read_kernel_csv(const std::string& path) {
  std::vector<KernelBenchReport> out;
  for (const auto& fields : read_csv(path, kKernelHeader)) {
    if (fields.size() != 7) throw IoError("csv '" + path + "': expected 7 columns");
    KernelBenchReport r;
    r.n = static_cast<int>(parse_int(fields[0], "n"));
    r.backend = backend_from_string(fields[1]);
    r.cells = static_cast<std::uint64_t>(parse_int(fields[2], "cells"));
    r.samples = static_cast<int>(parse_int(fields[3], "samples"));
    r.reps = static_cast<int>(parse_int(fields[4], "reps"));
    r.seconds = parse_double(fields[5], "seconds");
    r.vertices_per_sample = parse_double(fields[6], "vertices_per_sample");
    out.push_back(r);
  }
  return out;
}

void write_utilization_json(const std::string& path, std::span<const UtilizationReport> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"n", r.n},
                   {"level", r.level},
                   {"samples", r.samples},
                   {"estimate_pct", r.estimate_pct},
                   {"bound_pct", r.bound_pct}});
  }
  write_text(path, arr.dump(2) + "\n");
}

void write_kernel_json(const std::string& path, std::span<const KernelBenchReport> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"n", r.n},
                   {"backend", to_string(r.backend)},
                   {"cells", r.cells},
                   {"samples", r.samples},
                   {"reps", r.reps},
                   {"seconds", r.seconds},
                   {"vertices_per_sample", r.vertices_per_sample}});
  }
  write_text(path, arr.dump(2) + "\n");
}

}  // namespace sxen
