#include "sxen/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sxen/hashing.hpp"
#include "sxen/rng.hpp"

namespace sxen {
namespace {

constexpr int kMaxFeatures = 64;
constexpr std::uint32_t kMaxResolution = 1u << 26;

std::uint32_t axis_term(int axis, std::int64_t coord) {
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(coord)) *
         kHashPrimes[static_cast<size_t>(axis)];
}

}  // namespace

const char* to_string(Backend b) { return b == Backend::simplex ? "simplex" : "grid"; }

const char* to_string(LevelScale s) { return s == LevelScale::raw ? "raw" : "equal_memory"; }

void EncoderConfig::validate() const {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("encoder dim must be in [1, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(dim));
  }
  if (levels < 1) {
    throw std::invalid_argument("encoder levels must be >= 1, got " + std::to_string(levels));
  }
  if (!is_power_of_two(table_size)) {
    throw std::invalid_argument("encoder table_size must be a power of two, got " +
                                std::to_string(table_size));
  }
  if (features < 1 || features > kMaxFeatures) {
    throw std::invalid_argument("encoder features must be in [1, " +
                                std::to_string(kMaxFeatures) + "], got " +
                                std::to_string(features));
  }
  if (base_resolution < 1) {
    throw std::invalid_argument("encoder base_resolution must be >= 1, got " +
                                std::to_string(base_resolution));
  }
  if (!(growth > 1.0) || !std::isfinite(growth)) {
    throw std::invalid_argument("encoder growth must be a finite value > 1");
  }
  const std::uint32_t finest = level_resolution(*this, levels - 1);
  if (finest > kMaxResolution) {
    throw std::invalid_argument(
        "finest level resolution " + std::to_string(finest) + " exceeds the supported maximum " +
        std::to_string(kMaxResolution) + "; lower levels, growth, or base_resolution");
  }
}

double equal_memory_multiplier(int n) {
  if (n < 1 || n > kMaxDim) {
    throw std::invalid_argument("equal_memory_multiplier: dim out of range");
  }
  return std::pow(static_cast<double>(n + 1),
                  static_cast<double>(n - 1) / (2.0 * static_cast<double>(n)));
}

std::uint32_t level_resolution(const EncoderConfig& cfg, int level) {
  if (level < 0 || level >= cfg.levels) {
    throw std::invalid_argument("level_resolution: level out of range");
  }
  double r = static_cast<double>(cfg.base_resolution) * std::pow(cfg.growth, level);
  if (cfg.level_scale == LevelScale::equal_memory && cfg.backend == Backend::simplex) {
    r *= equal_memory_multiplier(cfg.dim);
  }
  const double floored = std::floor(r);
  if (floored < 1.0) return 1;
  if (floored > static_cast<double>(kMaxResolution)) {
    return kMaxResolution + 1;  // validate() reports this as out of range
  }
  return static_cast<std::uint32_t>(floored);
}

void EncoderGradient::reset(int levels, std::uint32_t table_size, int features) {
  if (levels < 1 || features < 1 || !is_power_of_two(table_size)) {
    throw std::invalid_argument("EncoderGradient::reset: invalid shape");
  }
  levels_ = levels;
  features_ = features;
  table_size_ = table_size;
  accum_.assign(static_cast<size_t>(levels),
                std::vector<double>(static_cast<size_t>(table_size) * static_cast<size_t>(features), 0.0));
  touched_.assign(static_cast<size_t>(levels), {});
  seen_.assign(static_cast<size_t>(levels), std::vector<std::uint8_t>(table_size, 0));
}

void EncoderGradient::clear() {
  for (size_t l = 0; l < touched_.size(); ++l) {
    auto& acc = accum_[l];
    auto& seen = seen_[l];
    for (std::uint32_t idx : touched_[l]) {
      std::fill_n(acc.begin() + static_cast<size_t>(idx) * static_cast<size_t>(features_),
                  features_, 0.0);
      seen[idx] = 0;
    }
    touched_[l].clear();
  }
}

void EncoderGradient::add(int level, std::uint32_t index, double scale,
                          std::span<const double> upstream_slice) {
  auto& seen = seen_[static_cast<size_t>(level)];
  if (!seen[index]) {
    seen[index] = 1;
    touched_[static_cast<size_t>(level)].push_back(index);
  }
  double* dst =
      accum_[static_cast<size_t>(level)].data() + static_cast<size_t>(index) * static_cast<size_t>(features_);
  for (int f = 0; f < features_; ++f) dst[f] += scale * upstream_slice[static_cast<size_t>(f)];
}

void EncoderGradient::merge(const EncoderGradient& other) {
  if (other.levels_ != levels_ || other.features_ != features_ || other.table_size_ != table_size_) {
    throw std::invalid_argument("EncoderGradient::merge: shape mismatch");
  }
  for (int l = 0; l < levels_; ++l) {
    for (std::uint32_t idx : other.touched_[static_cast<size_t>(l)]) {
      add(l, idx, 1.0, other.slice(l, idx));
    }
  }
}

std::uint64_t EncoderGradient::touched_total() const {
  std::uint64_t total = 0;
  for (const auto& t : touched_) total += t.size();
  return total;
}

HashEncoder::HashEncoder(HashEncoder&& other) noexcept
    : cfg_(other.cfg_),
      sc_(other.sc_),
      res_(std::move(other.res_)),
      tables_(std::move(other.tables_)),
      touched_(other.touched_.load(std::memory_order_relaxed)),
      oob_(other.oob_.load(std::memory_order_relaxed)) {}

HashEncoder& HashEncoder::operator=(HashEncoder&& other) noexcept {
  cfg_ = other.cfg_;
  sc_ = other.sc_;
  res_ = std::move(other.res_);
  tables_ = std::move(other.tables_);
  touched_.store(other.touched_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  oob_.store(other.oob_.load(std::memory_order_relaxed), std::memory_order_relaxed);
  return *this;
}

HashEncoder::HashEncoder(EncoderConfig cfg) : cfg_(cfg), sc_(SkewConstants::make(cfg.dim)) {
  cfg_.validate();
  res_.resize(static_cast<size_t>(cfg_.levels));
  for (int l = 0; l < cfg_.levels; ++l) {
    res_[static_cast<size_t>(l)] = level_resolution(cfg_, l);
  }
  tables_.assign(static_cast<size_t>(cfg_.levels),
                 std::vector<float>(static_cast<size_t>(cfg_.table_size) *
                                        static_cast<size_t>(cfg_.features),
                                    0.0f));
}

void HashEncoder::init_tables(std::uint64_t seed) {
  for (int l = 0; l < cfg_.levels; ++l) {
    CounterRng rng(seed, static_cast<std::uint64_t>(l));
    for (float& v : tables_[static_cast<size_t>(l)]) {
      v = static_cast<float>(rng.next_double(-1e-4, 1e-4));
    }
  }
}

std::uint64_t HashEncoder::parameter_count() const {
  return static_cast<std::uint64_t>(cfg_.levels) * cfg_.table_size *
         static_cast<std::uint64_t>(cfg_.features);
}

void HashEncoder::check_input(std::span<const double> x) const {
  if (x.size() != static_cast<size_t>(cfg_.dim)) {
    throw std::invalid_argument("encode: expected " + std::to_string(cfg_.dim) +
                                " coordinates, got " + std::to_string(x.size()));
  }
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
      throw std::invalid_argument("encode: coordinate " + std::to_string(i) +
                                  " outside the unit cube");
    }
  }
}

void HashEncoder::gather_simplex(int level, std::span<const double> x, LevelLookup& out) const {
  const int n = cfg_.dim;
  const std::uint32_t nl = res_[static_cast<size_t>(level)];
  // Scaling by N/S keeps the skewed image of the unit cube inside [0, N]^n.
  const double s = static_cast<double>(nl) / sc_.scale;
  const double one_below = std::nextafter(1.0, 0.0);

  std::array<double, kMaxDim> y;
  for (int i = 0; i < n; ++i) y[static_cast<size_t>(i)] = std::min(x[static_cast<size_t>(i)], one_below) * s;
  skew_in_place(std::span<double>(y.data(), static_cast<size_t>(n)), sc_);

  std::array<std::int64_t, kMaxDim> base;
  std::array<double, kMaxDim> fracs;
  bool oob = false;
  const auto limit = static_cast<std::int64_t>(nl);
  for (int i = 0; i < n; ++i) {
    const double f = std::floor(y[static_cast<size_t>(i)]);
    auto b = static_cast<std::int64_t>(f);
    if (b < 0 || b + 1 > limit) {
      oob = true;
      b = std::clamp<std::int64_t>(b, 0, limit - 1);
    }
    base[static_cast<size_t>(i)] = b;
    fracs[static_cast<size_t>(i)] =
        std::clamp(y[static_cast<size_t>(i)] - static_cast<double>(b), 0.0, one_below);
  }
  if (oob) oob_.fetch_add(1, std::memory_order_relaxed);

  const Subdivision sub = subdivide(std::span<const double>(fracs.data(), static_cast<size_t>(n)));
  const BarycentricWeights w = barycentric_weights(sub.sorted_view());

  const std::uint32_t mask = cfg_.table_size - 1u;
  std::array<std::int64_t, kMaxDim> coords = base;
  std::uint32_t h = hash_coords(std::span<const std::int64_t>(base.data(), static_cast<size_t>(n)));
  out.count = n + 1;
  out.index[0] = h & mask;
  out.weight[0] = w.weights[0];
  for (int k = 0; k < n; ++k) {
    const int axis = sub.perm[static_cast<size_t>(k)];
    h ^= axis_term(axis, coords[static_cast<size_t>(axis)]);
    coords[static_cast<size_t>(axis)] += 1;
    h ^= axis_term(axis, coords[static_cast<size_t>(axis)]);
    out.index[static_cast<size_t>(k) + 1] = h & mask;
    out.weight[static_cast<size_t>(k) + 1] = w.weights[static_cast<size_t>(k) + 1];
  }
  touched_.fetch_add(static_cast<std::uint64_t>(n) + 1, std::memory_order_relaxed);
}

void HashEncoder::gather_grid(int level, std::span<const double> x, LevelLookup& out) const {
  const int n = cfg_.dim;
  const std::uint32_t nl = res_[static_cast<size_t>(level)];
  const double one_below = std::nextafter(1.0, 0.0);

  std::array<std::int64_t, kMaxDim> base;
  std::array<double, kMaxDim> w0;
  std::array<double, kMaxDim> w1;
  bool oob = false;
  const auto limit = static_cast<std::int64_t>(nl);
  for (int i = 0; i < n; ++i) {
    const double y = std::min(x[static_cast<size_t>(i)], one_below) * static_cast<double>(nl);
    const double f = std::floor(y);
    auto b = static_cast<std::int64_t>(f);
    if (b < 0 || b + 1 > limit) {
      oob = true;
      b = std::clamp<std::int64_t>(b, 0, limit - 1);
    }
    const double frac = std::clamp(y - static_cast<double>(b), 0.0, one_below);
    base[static_cast<size_t>(i)] = b;
    w1[static_cast<size_t>(i)] = frac;
    w0[static_cast<size_t>(i)] = 1.0 - frac;
  }
  if (oob) oob_.fetch_add(1, std::memory_order_relaxed);

  const int corners = 1 << n;
  out.count = corners;
  std::array<std::int64_t, kMaxDim> c;
  for (int m = 0; m < corners; ++m) {
    double weight = 1.0;
    for (int d = 0; d < n; ++d) {
      const int bit = (m >> d) & 1;
      c[static_cast<size_t>(d)] = base[static_cast<size_t>(d)] + bit;
      weight *= bit ? w1[static_cast<size_t>(d)] : w0[static_cast<size_t>(d)];
    }
    out.index[static_cast<size_t>(m)] =
        hash_coords(std::span<const std::int64_t>(c.data(), static_cast<size_t>(n))) &
        (cfg_.table_size - 1u);
    out.weight[static_cast<size_t>(m)] = weight;
  }
  touched_.fetch_add(static_cast<std::uint64_t>(corners), std::memory_order_relaxed);
}

void HashEncoder::gather(int level, std::span<const double> x, LevelLookup& out) const {
  if (cfg_.backend == Backend::simplex) {
    gather_simplex(level, x, out);
  } else {
    gather_grid(level, x, out);
  }
}

void HashEncoder::encode(std::span<const double> x, std::span<float> out) const {
  check_input(x);
  if (out.size() != static_cast<size_t>(cfg_.encoded_width())) {
    throw std::invalid_argument("encode: output span has wrong width");
  }
  const int f_count = cfg_.features;
  LevelLookup lu;
  std::array<double, kMaxFeatures> acc;
  for (int l = 0; l < cfg_.levels; ++l) {
    gather(l, x, lu);
    acc.fill(0.0);
    const float* tab = tables_[static_cast<size_t>(l)].data();
    for (int i = 0; i < lu.count; ++i) {
      const double wi = lu.weight[static_cast<size_t>(i)];
      const float* entry = tab + static_cast<size_t>(lu.index[static_cast<size_t>(i)]) * static_cast<size_t>(f_count);
      for (int f = 0; f < f_count; ++f) acc[static_cast<size_t>(f)] += wi * entry[f];
    }
    float* dst = out.data() + static_cast<size_t>(l) * static_cast<size_t>(f_count);
    for (int f = 0; f < f_count; ++f) dst[f] = static_cast<float>(acc[static_cast<size_t>(f)]);
  }
}

void HashEncoder::encode_backward(std::span<const double> x, std::span<const double> upstream,
                                  EncoderGradient& grad) const {
  check_input(x);
  if (upstream.size() != static_cast<size_t>(cfg_.encoded_width())) {
    throw std::invalid_argument("encode_backward: upstream span has wrong width");
  }
  if (grad.levels() != cfg_.levels || grad.features() != cfg_.features) {
    throw std::invalid_argument("encode_backward: gradient accumulator shape mismatch");
  }
  LevelLookup lu;
  for (int l = 0; l < cfg_.levels; ++l) {
    gather(l, x, lu);
    const auto slice = upstream.subspan(static_cast<size_t>(l) * static_cast<size_t>(cfg_.features),
                                        static_cast<size_t>(cfg_.features));
    for (int i = 0; i < lu.count; ++i) {
      grad.add(l, lu.index[static_cast<size_t>(i)], lu.weight[static_cast<size_t>(i)], slice);
    }
  }
}

}  // namespace sxen
