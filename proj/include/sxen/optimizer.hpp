#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sxen/encoding.hpp"
#include "sxen/errors.hpp"

namespace sxen {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-15;
};

/// Bias-corrected adaptive-moment update over a dense parameter vector.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(size_t size) { reset(size); }
  void reset(size_t size);

  std::int64_t step_count() const { return t_; }

  /// One update over all parameters. Throws TrainingError on a non-finite
  /// gradient component.
  void step(std::span<float> params, std::span<const double> grads, const AdamConfig& cfg);

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

/// Adaptive-moment update over hash-table entries that only visits the
/// entries touched by the accumulated gradient (lazy sparse variant: moments
/// of untouched entries do not decay).
class SparseAdamState {
 public:
  SparseAdamState() = default;
  SparseAdamState(int levels, std::uint32_t table_size, int features) {
    reset(levels, table_size, features);
  }
  void reset(int levels, std::uint32_t table_size, int features);

  std::int64_t step_count() const { return t_; }

  void step(HashEncoder& encoder, const EncoderGradient& grads, const AdamConfig& cfg);

 private:
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  int features_ = 0;
  std::int64_t t_ = 0;
};

}  // namespace sxen
