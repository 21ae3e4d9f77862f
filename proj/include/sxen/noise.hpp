#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace sxen {

/// Quintic fade 6t^5 - 15t^4 + 10t^3: C^2, with vanishing first and second
/// derivatives at both endpoints. Throws std::invalid_argument outside [0,1].
double smoother_step(double t);

/// Produces the gradient for an integer lattice vertex (unit length for the
/// built-in generator; tests may inject hand-placed ones).
using GradientFn =
    std::function<void(std::span<const std::int64_t> vertex, std::span<double> out)>;

/// Built-in gradient: Gaussian draws keyed on (vertex, seed), normalized.
void lattice_gradient(std::span<const std::int64_t> vertex, std::uint64_t seed,
                      std::span<double> out);

/// Gradient noise on the integer grid: per-corner gradient dot displacement,
/// blended n-linearly with smoother-step-warped fractions.
double perlin_value(std::span<const double> x, std::uint64_t seed);
double perlin_value_with(std::span<const double> x, const GradientFn& gradient);

/// Gradient noise on the simplex lattice: skew, subdivide, per-vertex
/// gradient dot displacement (displacements measured in unskewed space),
/// combined with smoother-step-warped barycentric weights renormalized to
/// sum 1.
double simplex_noise_value(std::span<const double> x, std::uint64_t seed);
double simplex_noise_value_with(std::span<const double> x, const GradientFn& gradient);

enum class NoiseKind { perlin, simplex };

const char* to_string(NoiseKind k);

struct NoiseFieldSpec {
  int dim = 2;
  std::uint64_t seed = 7;
  NoiseKind kind = NoiseKind::perlin;
  int octaves = 1;
  double frequency = 4.0;  // lattice cells per unit of input space

  void validate() const;
};

/// Deterministic scalar field over the unit cube: octave o contributes
/// noise(x * frequency * 2^o) with weight 0.5^o, weights normalized to sum 1.
double noise_field_value(const NoiseFieldSpec& spec, std::span<const double> x);

}  // namespace sxen
