#include "sxen/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sxen/lattice.hpp"
#include "sxen/rng.hpp"

namespace sxen {
namespace {

void check_coords(std::span<const double> x) {
  if (x.empty() || x.size() > static_cast<size_t>(kMaxDim)) {
    throw std::invalid_argument("noise: dimension must be in [1, " + std::to_string(kMaxDim) +
                                "]");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("noise: coordinates must be finite");
  }
}

GradientFn seeded_gradient(std::uint64_t seed) {
  return [seed](std::span<const std::int64_t> vertex, std::span<double> out) {
    lattice_gradient(vertex, seed, out);
  };
}

}  // namespace

double smoother_step(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("smoother_step: argument must lie in [0, 1]");
  }
  return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

void lattice_gradient(std::span<const std::int64_t> vertex, std::uint64_t seed,
                      std::span<double> out) {
  std::uint64_t key = mix64(seed);
  for (std::int64_t c : vertex) key = hash_combine(key, static_cast<std::uint64_t>(c));
  CounterRng rng(key);
  double norm_sq = 0.0;
  do {
    rng.fill_gaussian(out);
    norm_sq = 0.0;
    for (double v : out) norm_sq += v * v;
  } while (norm_sq < 1e-24);  // essentially never loops; guards the unit-length contract
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : out) v *= inv;
}

double perlin_value_with(std::span<const double> x, const GradientFn& gradient) {
  check_coords(x);
  const int n = static_cast<int>(x.size());

  std::array<std::int64_t, kMaxDim> base;
  std::array<double, kMaxDim> frac;
  std::array<double, kMaxDim> warped;
  for (int i = 0; i < n; ++i) {
    const double f = std::floor(x[static_cast<size_t>(i)]);
    base[static_cast<size_t>(i)] = static_cast<std::int64_t>(f);
    frac[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] - f;
    warped[static_cast<size_t>(i)] = smoother_step(frac[static_cast<size_t>(i)]);
  }

  std::array<std::int64_t, kMaxDim> corner;
  std::array<double, kMaxDim> grad;
  double value = 0.0;
  const int corners = 1 << n;
  for (int m = 0; m < corners; ++m) {
    double weight = 1.0;
    for (int d = 0; d < n; ++d) {
      const int bit = (m >> d) & 1;
      corner[static_cast<size_t>(d)] = base[static_cast<size_t>(d)] + bit;
      weight *= bit ? warped[static_cast<size_t>(d)] : 1.0 - warped[static_cast<size_t>(d)];
    }
    if (weight == 0.0) continue;
    gradient(std::span<const std::int64_t>(corner.data(), static_cast<size_t>(n)),
             std::span<double>(grad.data(), static_cast<size_t>(n)));
    double dot = 0.0;
    for (int d = 0; d < n; ++d) {
      dot += grad[static_cast<size_t>(d)] *
             (frac[static_cast<size_t>(d)] - static_cast<double>((m >> d) & 1));
    }
    value += weight * dot;
  }
  return value;
}

double perlin_value(std::span<const double> x, std::uint64_t seed) {
  return perlin_value_with(x, seeded_gradient(seed));
}

double simplex_noise_value_with(std::span<const double> x, const GradientFn& gradient) {
  check_coords(x);
  const int n = static_cast<int>(x.size());
  const SkewConstants sc = SkewConstants::make(n);

  std::array<double, kMaxDim> y;
  std::copy(x.begin(), x.end(), y.begin());
  skew_in_place(std::span<double>(y.data(), static_cast<size_t>(n)), sc);

  std::array<std::int64_t, kMaxDim> base;
  std::array<double, kMaxDim> frac;
  for (int i = 0; i < n; ++i) {
    const double f = std::floor(y[static_cast<size_t>(i)]);
    base[static_cast<size_t>(i)] = static_cast<std::int64_t>(f);
    frac[static_cast<size_t>(i)] =
        std::clamp(y[static_cast<size_t>(i)] - f, 0.0, std::nextafter(1.0, 0.0));
  }

  const Subdivision sub = subdivide(std::span<const double>(frac.data(), static_cast<size_t>(n)));
  const BarycentricWeights bw = barycentric_weights(sub.sorted_view());

  std::array<std::int64_t, kMaxDim> vertex = base;
  std::array<double, kMaxDim> grad;
  std::array<double, kMaxDim> unskewed;
  std::array<double, kMaxDim + 1> warped;
  std::array<double, kMaxDim + 1> dots;
  double warped_sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) vertex[sub.perm[static_cast<size_t>(k - 1)]] += 1;
    for (int i = 0; i < n; ++i) {
      unskewed[static_cast<size_t>(i)] = static_cast<double>(vertex[static_cast<size_t>(i)]);
    }
    unskew_in_place(std::span<double>(unskewed.data(), static_cast<size_t>(n)), sc);
    gradient(std::span<const std::int64_t>(vertex.data(), static_cast<size_t>(n)),
             std::span<double>(grad.data(), static_cast<size_t>(n)));
    double dot = 0.0;
    for (int i = 0; i < n; ++i) {
      dot += grad[static_cast<size_t>(i)] *
             (x[static_cast<size_t>(i)] - unskewed[static_cast<size_t>(i)]);
    }
    dots[static_cast<size_t>(k)] = dot;
    warped[static_cast<size_t>(k)] = smoother_step(bw.weights[static_cast<size_t>(k)]);
    warped_sum += warped[static_cast<size_t>(k)];
  }
  // Barycentric weights sum to 1, so at least one is >= 1/(n+1) and the
  // warped sum cannot vanish.
  double value = 0.0;
  for (int k = 0; k <= n; ++k) {
    value += warped[static_cast<size_t>(k)] / warped_sum * dots[static_cast<size_t>(k)];
  }
  return value;
}

double simplex_noise_value(std::span<const double> x, std::uint64_t seed) {
  return simplex_noise_value_with(x, seeded_gradient(seed));
}

const char* to_string(NoiseKind k) { return k == NoiseKind::perlin ? "perlin" : "simplex"; }

void NoiseFieldSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) {
    throw std::invalid_argument("noise field: dim must be in [1, " + std::to_string(kMaxDim) +
                                "]");
  }
  if (octaves < 1) throw std::invalid_argument("noise field: octaves must be >= 1");
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw std::invalid_argument("noise field: frequency must be finite and > 0");
  }
}

double noise_field_value(const NoiseFieldSpec& spec, std::span<const double> x) {
  spec.validate();
  if (x.size() != static_cast<size_t>(spec.dim)) {
    throw std::invalid_argument("noise field: coordinate count != dim");
  }
  std::array<double, kMaxDim> scaled;
  double value = 0.0;
  double weight = 1.0;
  double weight_sum = 0.0;
  double freq = spec.frequency;
  for (int o = 0; o < spec.octaves; ++o) {
    for (int i = 0; i < spec.dim; ++i) scaled[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] * freq;
    const auto view = std::span<const double>(scaled.data(), static_cast<size_t>(spec.dim));
    const std::uint64_t octave_seed = hash_combine(spec.seed, static_cast<std::uint64_t>(o));
    value += weight * (spec.kind == NoiseKind::perlin ? perlin_value(view, octave_seed)
                                                      : simplex_noise_value(view, octave_seed));
    weight_sum += weight;
    weight *= 0.5;
    freq *= 2.0;
  }
  return value / weight_sum;
}

}  // namespace sxen
