#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace sxen {

// Lattice math is fixed-capacity: callers pass the active dimension n and
// only the first n entries of each array are meaningful.
inline constexpr int kMaxDim = 8;

/// Per-dimension constants of the skew/unskew coordinate transform.
///
/// skew   adds F_n * sum(x) to every coordinate,
/// unskew subtracts G_n * sum(x') from every coordinate,
/// scale  S_n = sqrt(n+1) is the factor by which the transformed lattice
///        cell diagonal grows; sampled coordinates are divided by it so the
///        skewed image of the sampling cube stays inside the stored lattice.
///
/// F_n - G_n == n * F_n * G_n, which makes unskew the exact inverse of skew.
struct SkewConstants {
  int n = 0;
  double skew = 0.0;    // F_n = (sqrt(n+1) - 1) / n
  double unskew = 0.0;  // G_n = (1 - 1/sqrt(n+1)) / n
  double scale = 1.0;   // S_n = sqrt(n+1)

  static SkewConstants make(int n);
};

/// A point in the original Cartesian coordinate system.
struct LatticePoint {
  std::array<double, kMaxDim> coords{};
  int n = 0;

  std::span<const double> view() const { return {coords.data(), static_cast<size_t>(n)}; }
};

/// A point in the skewed coordinate system.
struct SkewedPoint {
  std::array<double, kMaxDim> coords{};
  int n = 0;

  std::span<const double> view() const { return {coords.data(), static_cast<size_t>(n)}; }
};

LatticePoint make_point(std::span<const double> coords);

SkewedPoint skew(const LatticePoint& x);
LatticePoint unskew(const SkewedPoint& xs);

// In-place kernels used by the encoding hot path. `x` holds n values.
void skew_in_place(std::span<double> x, const SkewConstants& sc);
void unskew_in_place(std::span<double> x, const SkewConstants& sc);

/// Axis permutation; perm[k] is the axis receiving the (k+1)-th increment
/// when walking the simplex vertex chain, i.e. axes listed in descending
/// order of their fractional coordinate.
using Perm = std::array<std::uint8_t, kMaxDim>;

/// One simplex of the lattice: the integer base corner of its cell plus the
/// permutation selecting one of the n! simplices subdividing that cell.
struct SimplexCell {
  std::array<std::int64_t, kMaxDim> base{};
  Perm perm{};
  int n = 0;
};

/// The n+1 vertices of a simplex, ordered along the increment chain:
/// vertices[0] is the base corner, vertices[n] the opposite corner, and
/// consecutive vertices differ by +1 in exactly one coordinate.
struct VertexSet {
  std::array<std::array<std::int64_t, kMaxDim>, kMaxDim + 1> vertices{};
  int n = 0;

  std::span<const std::int64_t> vertex(int i) const {
    return {vertices[static_cast<size_t>(i)].data(), static_cast<size_t>(n)};
  }
};

struct Subdivision {
  Perm perm{};
  std::array<double, kMaxDim> sorted{};  // fracs reordered, descending
  int n = 0;

  std::span<const double> sorted_view() const { return {sorted.data(), static_cast<size_t>(n)}; }
};

/// Locates the simplex containing a point with the given cell-relative
/// fractional coordinates (all in [0,1)). Ties keep ascending axis order,
/// so points on a shared face resolve to one consistent simplex.
Subdivision subdivide(std::span<const double> fracs);

/// Vertex chain of the simplex `perm` relative to the cell origin.
VertexSet unit_vertices(const Perm& perm, int n);

/// Absolute lattice coordinates of a cell's simplex vertices.
VertexSet cell_vertices(const SimplexCell& cell);

struct BarycentricWeights {
  std::array<double, kMaxDim + 1> weights{};
  int n = 0;

  std::span<const double> view() const { return {weights.data(), static_cast<size_t>(n) + 1}; }
};

/// Convex-combination weights of a point against its simplex vertex chain.
/// Input is the descending-sorted fractional coordinates from subdivide().
/// weights[0] = 1 - x_1, weights[i] = x_i - x_{i+1}, weights[n] = x_n.
BarycentricWeights barycentric_weights(std::span<const double> sorted_fracs);

/// Membership test for the simplex identified by `perm` within the unit
/// cube: 1 >= x[perm[0]] >= x[perm[1]] >= ... >= x[perm[n-1]] >= 0.
/// Boundaries are inclusive, so faces are shared between simplices.
bool simplex_contains(const Perm& perm, int n, std::span<const double> point);

/// The n(n+1)/2 edge lengths of one lattice simplex, sorted ascending.
/// transformed == false: lengths in the skewed-lattice's own coordinates
/// (n+1-k edges of length sqrt(k) for k = 1..n).
/// transformed == true: lengths after mapping the vertices back to the
/// original coordinate system through unskew.
std::vector<double> edge_length_multiset(int n, bool transformed);

/// Same multiset computed from actual vertex coordinates.
std::vector<double> edge_length_multiset(const VertexSet& vs, bool transformed);

}  // namespace sxen
