#pragma once

// Independent reference implementations the tests compare the library
// against. Everything here re-derives its result from first principles —
// Eigen for the linear algebra, scalar re-implementations for hashing and
// lookup — and deliberately avoids the library's own code paths, so
// agreement between the two is evidence rather than tautology.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sxen/mlp.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Coordinate transforms as explicit dense matrices.

inline Eigen::MatrixXd skew_matrix(int n) {
  const double f = (std::sqrt(static_cast<double>(n) + 1.0) - 1.0) / static_cast<double>(n);
  return Eigen::MatrixXd::Identity(n, n) + Eigen::MatrixXd::Constant(n, n, f);
}

inline Eigen::MatrixXd unskew_matrix(int n) {
  const double g = (1.0 - 1.0 / std::sqrt(static_cast<double>(n) + 1.0)) / static_cast<double>(n);
  return Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, g);
}

// ---------------------------------------------------------------------------
// Barycentric weights by solving the (n+1)x(n+1) system [V^T; 1^T] w = [p; 1]
// with a generic pivoted solver instead of the closed form.

inline Eigen::VectorXd barycentric_solve(const std::vector<Eigen::VectorXd>& verts,
                                         const Eigen::VectorXd& p) {
  const int n = static_cast<int>(p.size());
  Eigen::MatrixXd a(n + 1, n + 1);
  Eigen::VectorXd b(n + 1);
  for (int j = 0; j <= n; ++j) {
    a.block(0, j, n, 1) = verts[static_cast<size_t>(j)];
    a(n, j) = 1.0;
  }
  b.head(n) = p;
  b(n) = 1.0;
  return a.fullPivLu().solve(b);
}

// ---------------------------------------------------------------------------
// Spatial hash, re-derived: product carried in 64 bits and reduced mod 2^32,
// which agrees with 32-bit wraparound multiplication.

inline std::uint32_t hash(std::span<const std::int64_t> coords) {
  static constexpr std::uint64_t kPrimes[8] = {1ull,          2654435761ull, 805459861ull,
                                               3674653429ull, 2097192037ull, 1434869437ull,
                                               2165219737ull, 4294967291ull};
  std::uint64_t acc = 0;
  for (size_t i = 0; i < coords.size(); ++i) {
    const std::uint64_t c = static_cast<std::uint64_t>(coords[i]) & 0xffffffffull;
    acc ^= (c * kPrimes[i]) & 0xffffffffull;
  }
  return static_cast<std::uint32_t>(acc);
}

// ---------------------------------------------------------------------------
// Single-level feature lookups, re-derived end to end: clamp, scale, skew
// via the dense matrix, floor, sort by fraction (stable, descending), walk
// the vertex chain, hash every vertex from scratch, and blend in doubles.

struct LevelParams {
  int n = 0;
  std::uint32_t resolution = 0;
  std::uint32_t table_size = 0;
  int features = 0;
};

inline std::vector<double> encode_simplex_level(const LevelParams& lp,
                                                std::span<const float> table,
                                                std::span<const double> x) {
  const int n = lp.n;
  const double one_below = std::nextafter(1.0, 0.0);
  const double scale = static_cast<double>(lp.resolution) / std::sqrt(static_cast<double>(n) + 1.0);

  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = std::min(x[static_cast<size_t>(i)], one_below) * scale;
  const Eigen::VectorXd y = skew_matrix(n) * v;

  std::vector<std::int64_t> base(static_cast<size_t>(n));
  std::vector<double> frac(static_cast<size_t>(n));
  const auto limit = static_cast<std::int64_t>(lp.resolution);
  for (int i = 0; i < n; ++i) {
    auto b = static_cast<std::int64_t>(std::floor(y(i)));
    b = std::clamp<std::int64_t>(b, 0, limit - 1);
    base[static_cast<size_t>(i)] = b;
    frac[static_cast<size_t>(i)] = std::clamp(y(i) - static_cast<double>(b), 0.0, one_below);
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b2) {
    return frac[static_cast<size_t>(a)] > frac[static_cast<size_t>(b2)];
  });

  std::vector<double> w(static_cast<size_t>(n) + 1);
  w[0] = 1.0 - frac[static_cast<size_t>(order[0])];
  for (int k = 1; k < n; ++k) {
    w[static_cast<size_t>(k)] =
        frac[static_cast<size_t>(order[static_cast<size_t>(k) - 1])] -
        frac[static_cast<size_t>(order[static_cast<size_t>(k)])];
  }
  w[static_cast<size_t>(n)] = frac[static_cast<size_t>(order[static_cast<size_t>(n) - 1])];

  std::vector<double> out(static_cast<size_t>(lp.features), 0.0);
  std::vector<std::int64_t> vertex = base;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) vertex[static_cast<size_t>(order[static_cast<size_t>(k) - 1])] += 1;
    const std::uint32_t idx = hash(vertex) & (lp.table_size - 1u);
    for (int f = 0; f < lp.features; ++f) {
      out[static_cast<size_t>(f)] +=
          w[static_cast<size_t>(k)] *
          static_cast<double>(table[static_cast<size_t>(idx) * static_cast<size_t>(lp.features) +
                                    static_cast<size_t>(f)]);
    }
  }
  return out;
}

inline std::vector<double> encode_grid_level(const LevelParams& lp,
                                             std::span<const float> table,
                                             std::span<const double> x) {
  const int n = lp.n;
  const double one_below = std::nextafter(1.0, 0.0);

  std::vector<std::int64_t> base(static_cast<size_t>(n));
  std::vector<double> frac(static_cast<size_t>(n));
  const auto limit = static_cast<std::int64_t>(lp.resolution);
  for (int i = 0; i < n; ++i) {
    const double y = std::min(x[static_cast<size_t>(i)], one_below) *
                     static_cast<double>(lp.resolution);
    auto b = static_cast<std::int64_t>(std::floor(y));
    b = std::clamp<std::int64_t>(b, 0, limit - 1);
    base[static_cast<size_t>(i)] = b;
    frac[static_cast<size_t>(i)] = std::clamp(y - static_cast<double>(b), 0.0, one_below);
  }

  std::vector<double> out(static_cast<size_t>(lp.features), 0.0);
  std::vector<std::int64_t> corner(static_cast<size_t>(n));
  for (int m = 0; m < (1 << n); ++m) {
    double weight = 1.0;
    for (int d = 0; d < n; ++d) {
      const int bit = (m >> d) & 1;
      corner[static_cast<size_t>(d)] = base[static_cast<size_t>(d)] + bit;
      weight *= bit ? frac[static_cast<size_t>(d)] : 1.0 - frac[static_cast<size_t>(d)];
    }
    const std::uint32_t idx = hash(corner) & (lp.table_size - 1u);
    for (int f = 0; f < lp.features; ++f) {
      out[static_cast<size_t>(f)] +=
          weight *
          static_cast<double>(table[static_cast<size_t>(idx) * static_cast<size_t>(lp.features) +
                                    static_cast<size_t>(f)]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense matrix-product oracle for the MLP forward pass.

inline Eigen::VectorXd mlp_forward(const sxen::Mlp& mlp, std::span<const float> input) {
  const auto& cfg = mlp.config();
  Eigen::VectorXd v(cfg.input_width);
  for (int i = 0; i < cfg.input_width; ++i) v(i) = static_cast<double>(input[static_cast<size_t>(i)]);
  for (int l = 0; l < cfg.layer_count(); ++l) {
    const int in_w = cfg.layer_input_width(l);
    const int out_w = cfg.layer_output_width(l);
    const auto wspan = mlp.weights(l);
    const auto bspan = mlp.biases(l);
    Eigen::MatrixXd w(out_w, in_w);
    Eigen::VectorXd b(out_w);
    for (int o = 0; o < out_w; ++o) {
      b(o) = static_cast<double>(bspan[static_cast<size_t>(o)]);
      for (int i = 0; i < in_w; ++i) {
        w(o, i) = static_cast<double>(wspan[static_cast<size_t>(o) * static_cast<size_t>(in_w) +
                                            static_cast<size_t>(i)]);
      }
    }
    v = w * v + b;
    if (l + 1 < cfg.layer_count()) v = v.cwiseMax(0.0);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Volume of the unskewed scaled cell via a generic determinant.

inline double volume_ratio_eigen(int n) {
  const double s = std::sqrt(static_cast<double>(n) + 1.0);
  return 1.0 / std::abs((unskew_matrix(n) * (s * Eigen::MatrixXd::Identity(n, n))).determinant());
}

}  // namespace oracle
