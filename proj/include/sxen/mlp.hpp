#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sxen {

enum class Activation { relu };

struct MlpConfig {
  int input_width = 32;
  int hidden_width = 64;
  int hidden_layers = 2;  // ReLU layers between input and output; 0 means a single affine map
  int output_width = 3;
  Activation hidden_activation = Activation::relu;  // output layer is always identity

  int layer_count() const { return hidden_layers + 1; }  // affine layers
  int layer_input_width(int layer) const { return layer == 0 ? input_width : hidden_width; }
  int layer_output_width(int layer) const {
    return layer == layer_count() - 1 ? output_width : hidden_width;
  }

  void validate() const;
};

class Mlp;

/// Per-thread scratch holding the activations of one forward pass, which the
/// matching backward pass consumes. Activation layout: slot 0 is the input,
/// slot i the output of affine layer i-1 (post-ReLU for hidden layers).
class MlpWorkspace {
 public:
  MlpWorkspace() = default;
  explicit MlpWorkspace(const MlpConfig& cfg) { reset(cfg); }
  void reset(const MlpConfig& cfg);

  std::span<const float> output() const { return act_.back(); }
  std::span<const double> input_grad() const { return input_grad_; }
  bool has_forward() const { return forward_done_; }

 private:
  friend class Mlp;
  std::vector<std::vector<float>> act_;
  std::vector<double> delta_cur_;
  std::vector<double> delta_next_;
  std::vector<double> input_grad_;
  bool forward_done_ = false;
};

/// Dense parameter gradient, laid out exactly like Mlp::parameters() but in
/// 64-bit so per-batch sums do not lose low bits.
class MlpGradient {
 public:
  MlpGradient() = default;
  explicit MlpGradient(const MlpConfig& cfg) { reset(cfg); }
  void reset(const MlpConfig& cfg);
  void clear();
  void merge(const MlpGradient& other);

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> weights(int layer);
  std::span<double> biases(int layer);

 private:
  std::vector<double> values_;
  std::vector<size_t> w_off_;
  std::vector<size_t> b_off_;
  std::vector<size_t> w_len_;
  std::vector<size_t> b_len_;
};

/// Fully connected network: ReLU hidden layers, identity output. Weights are
/// float32 row-major (output x input); matvec sums accumulate in double.
class Mlp {
 public:
  explicit Mlp(MlpConfig cfg);

  const MlpConfig& config() const { return cfg_; }
  int layer_count() const { return cfg_.layer_count(); }
  size_t parameter_count() const { return params_.size(); }

  /// Weights: He-uniform over fan-in; biases zero.
  void init_params(std::uint64_t seed);

  std::span<float> parameters() { return params_; }
  std::span<const float> parameters() const { return params_; }
  std::span<float> weights(int layer);
  std::span<const float> weights(int layer) const;
  std::span<float> biases(int layer);
  std::span<const float> biases(int layer) const;

  void forward(std::span<const float> input, MlpWorkspace& ws) const;

  /// Backpropagates d(loss)/d(output), adding parameter gradients into
  /// `grad` and leaving d(loss)/d(input) in the workspace. Throws
  /// std::logic_error if the workspace holds no forward activations.
  void backward(std::span<const double> upstream, MlpWorkspace& ws, MlpGradient& grad) const;

 private:
  MlpConfig cfg_;
  std::vector<float> params_;
  std::vector<size_t> w_off_;
  std::vector<size_t> b_off_;
};

}  // namespace sxen
