#include "sxen/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sxen {

namespace {

void require_dim(int n) {
  if (n < 1 || n > kMaxDim) {
    throw std::invalid_argument("dimension must be in [1, " + std::to_string(kMaxDim) +
                                "], got " + std::to_string(n));
  }
}

}  // namespace

SkewConstants SkewConstants::make(int n) {
  require_dim(n);
  const double root = std::sqrt(static_cast<double>(n) + 1.0);
  SkewConstants sc;
  sc.n = n;
  sc.skew = (root - 1.0) / static_cast<double>(n);
  sc.unskew = (1.0 - 1.0 / root) / static_cast<double>(n);
  sc.scale = root;
  return sc;
}

LatticePoint make_point(std::span<const double> coords) {
  require_dim(static_cast<int>(coords.size()));
  LatticePoint p;
  p.n = static_cast<int>(coords.size());
  std::copy(coords.begin(), coords.end(), p.coords.begin());
  return p;
}

void skew_in_place(std::span<double> x, const SkewConstants& sc) {
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) sum += x[i];
  const double shift = sc.skew * sum;
  for (size_t i = 0; i < x.size(); ++i) x[i] += shift;
}

void unskew_in_place(std::span<double> x, const SkewConstants& sc) {
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) sum += x[i];
  const double shift = sc.unskew * sum;
  for (size_t i = 0; i < x.size(); ++i) x[i] -= shift;
}

SkewedPoint skew(const LatticePoint& x) {
  require_dim(x.n);
  SkewedPoint out;
  out.n = x.n;
  out.coords = x.coords;
  skew_in_place({out.coords.data(), static_cast<size_t>(out.n)}, SkewConstants::make(x.n));
  return out;
}

LatticePoint unskew(const SkewedPoint& xs) {
  require_dim(xs.n);
  LatticePoint out;
  out.n = xs.n;
  out.coords = xs.coords;
  unskew_in_place({out.coords.data(), static_cast<size_t>(out.n)}, SkewConstants::make(xs.n));
  return out;
}

Subdivision subdivide(std::span<const double> fracs) {
  const int n = static_cast<int>(fracs.size());
  require_dim(n);
  for (int i = 0; i < n; ++i) {
    if (!(fracs[static_cast<size_t>(i)] >= 0.0 && fracs[static_cast<size_t>(i)] < 1.0)) {
      throw std::invalid_argument("fractional coordinate " + std::to_string(i) +
                                  " outside [0,1): " + std::to_string(fracs[static_cast<size_t>(i)]));
    }
  }

  Subdivision out;
  out.n = n;
  for (int i = 0; i < n; ++i) {
    out.perm[static_cast<size_t>(i)] = static_cast<std::uint8_t>(i);
    out.sorted[static_cast<size_t>(i)] = fracs[static_cast<size_t>(i)];
  }
  // Stable insertion sort, descending; n <= 8 so this beats anything fancier
  // and allocates nothing.
  for (int i = 1; i < n; ++i) {
    const double v = out.sorted[static_cast<size_t>(i)];
    const std::uint8_t a = out.perm[static_cast<size_t>(i)];
    int j = i - 1;
    while (j >= 0 && out.sorted[static_cast<size_t>(j)] < v) {
      out.sorted[static_cast<size_t>(j + 1)] = out.sorted[static_cast<size_t>(j)];
      out.perm[static_cast<size_t>(j + 1)] = out.perm[static_cast<size_t>(j)];
      --j;
    }
    out.sorted[static_cast<size_t>(j + 1)] = v;
    out.perm[static_cast<size_t>(j + 1)] = a;
  }
  return out;
}

VertexSet unit_vertices(const Perm& perm, int n) {
  require_dim(n);
  VertexSet vs;
  vs.n = n;
  std::array<std::int64_t, kMaxDim> cur{};
  vs.vertices[0] = cur;
  for (int k = 0; k < n; ++k) {
    cur[perm[static_cast<size_t>(k)]] += 1;
    vs.vertices[static_cast<size_t>(k) + 1] = cur;
  }
  return vs;
}

VertexSet cell_vertices(const SimplexCell& cell) {
  VertexSet vs = unit_vertices(cell.perm, cell.n);
  for (int i = 0; i <= cell.n; ++i) {
    for (int d = 0; d < cell.n; ++d) {
      vs.vertices[static_cast<size_t>(i)][static_cast<size_t>(d)] += cell.base[static_cast<size_t>(d)];
    }
  }
  return vs;
}

BarycentricWeights barycentric_weights(std::span<const double> sorted_fracs) {
  const int n = static_cast<int>(sorted_fracs.size());
  require_dim(n);
  for (int i = 0; i + 1 < n; ++i) {
    if (sorted_fracs[static_cast<size_t>(i)] < sorted_fracs[static_cast<size_t>(i) + 1]) {
      throw std::invalid_argument("fractional coordinates must be sorted descending");
    }
  }
  if (!(sorted_fracs[0] < 1.0) || !(sorted_fracs[static_cast<size_t>(n) - 1] >= 0.0)) {
    throw std::invalid_argument("sorted fractional coordinates must lie in [0,1)");
  }

  BarycentricWeights bw;
  bw.n = n;
  bw.weights[0] = 1.0 - sorted_fracs[0];
  for (int i = 1; i < n; ++i) {
    bw.weights[static_cast<size_t>(i)] =
        sorted_fracs[static_cast<size_t>(i) - 1] - sorted_fracs[static_cast<size_t>(i)];
  }
  bw.weights[static_cast<size_t>(n)] = sorted_fracs[static_cast<size_t>(n) - 1];
  return bw;
}

bool simplex_contains(const Perm& perm, int n, std::span<const double> point) {
  if (static_cast<int>(point.size()) != n) return false;
  double prev = 1.0;
  for (int k = 0; k < n; ++k) {
    const double v = point[perm[static_cast<size_t>(k)]];
    if (v > prev) return false;
    prev = v;
  }
  return prev >= 0.0;
}

std::vector<double> edge_length_multiset(int n, bool transformed) {
  require_dim(n);
  const SkewConstants sc = SkewConstants::make(n);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n) * (static_cast<size_t>(n) + 1) / 2);
  for (int k = 1; k <= n; ++k) {
    double len;
    if (transformed) {
      // Vertices i and i+k differ by k unit increments; unskewing subtracts
      // k*G_n from every coordinate of the difference vector.
      const double g = static_cast<double>(k) * sc.unskew;
      len = std::sqrt(static_cast<double>(k) * (1.0 - g) * (1.0 - g) +
                      static_cast<double>(n - k) * g * g);
    } else {
      len = std::sqrt(static_cast<double>(k));
    }
    for (int c = 0; c < n + 1 - k; ++c) out.push_back(len);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> edge_length_multiset(const VertexSet& vs, bool transformed) {
  const int n = vs.n;
  require_dim(n);
  const SkewConstants sc = SkewConstants::make(n);
  std::vector<double> out;
  out.reserve(static_cast<size_t>(n) * (static_cast<size_t>(n) + 1) / 2);
  for (int i = 0; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      std::array<double, kMaxDim> a{};
      std::array<double, kMaxDim> b{};
      for (int d = 0; d < n; ++d) {
        a[static_cast<size_t>(d)] = static_cast<double>(vs.vertices[static_cast<size_t>(i)][static_cast<size_t>(d)]);
        b[static_cast<size_t>(d)] = static_cast<double>(vs.vertices[static_cast<size_t>(j)][static_cast<size_t>(d)]);
      }
      if (transformed) {
        unskew_in_place({a.data(), static_cast<size_t>(n)}, sc);
        unskew_in_place({b.data(), static_cast<size_t>(n)}, sc);
      }
      double d2 = 0.0;
      for (int d = 0; d < n; ++d) {
        const double diff = a[static_cast<size_t>(d)] - b[static_cast<size_t>(d)];
        d2 += diff * diff;
      }
      out.push_back(std::sqrt(d2));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sxen
