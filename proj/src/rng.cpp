#include "sxen/rng.hpp"

#include <cmath>
#include <numbers>

namespace sxen {

void CounterRng::fill_gaussian(std::span<double> out) {
  size_t i = 0;
  while (i < out.size()) {
    // u1 in (0,1] so the log is finite.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    out[i++] = r * std::cos(a);
    if (i < out.size()) out[i++] = r * std::sin(a);
  }
}

}  // namespace sxen
