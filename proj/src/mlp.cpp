#include "sxen/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sxen/rng.hpp"

namespace sxen {
namespace {

constexpr int kMaxWidth = 1 << 14;

struct Layout {
  std::vector<size_t> w_off, b_off, w_len, b_len;
  size_t total = 0;
};

Layout make_layout(const MlpConfig& cfg) {
  Layout lay;
  for (int l = 0; l < cfg.layer_count(); ++l) {
    const auto in = static_cast<size_t>(cfg.layer_input_width(l));
    const auto out = static_cast<size_t>(cfg.layer_output_width(l));
    lay.w_off.push_back(lay.total);
    lay.w_len.push_back(in * out);
    lay.total += in * out;
    lay.b_off.push_back(lay.total);
    lay.b_len.push_back(out);
    lay.total += out;
  }
  return lay;
}

}  // namespace

void MlpConfig::validate() const {
  if (input_width < 1 || input_width > kMaxWidth) {
    throw std::invalid_argument("mlp input_width must be in [1, " + std::to_string(kMaxWidth) +
                                "], got " + std::to_string(input_width));
  }
  if (output_width < 1 || output_width > kMaxWidth) {
    throw std::invalid_argument("mlp output_width must be in [1, " + std::to_string(kMaxWidth) +
                                "], got " + std::to_string(output_width));
  }
  if (hidden_layers < 0) {
    throw std::invalid_argument("mlp hidden_layers must be >= 0, got " +
                                std::to_string(hidden_layers));
  }
  if (hidden_layers > 0 && (hidden_width < 1 || hidden_width > kMaxWidth)) {
    throw std::invalid_argument("mlp hidden_width must be in [1, " + std::to_string(kMaxWidth) +
                                "], got " + std::to_string(hidden_width));
  }
}

void MlpWorkspace::reset(const MlpConfig& cfg) {
  cfg.validate();
  act_.assign(static_cast<size_t>(cfg.layer_count()) + 1, {});
  act_[0].resize(static_cast<size_t>(cfg.input_width));
  size_t max_width = static_cast<size_t>(cfg.input_width);
  for (int l = 0; l < cfg.layer_count(); ++l) {
    const auto out = static_cast<size_t>(cfg.layer_output_width(l));
    act_[static_cast<size_t>(l) + 1].resize(out);
    max_width = std::max(max_width, out);
  }
  delta_cur_.resize(max_width);
  delta_next_.resize(max_width);
  input_grad_.resize(static_cast<size_t>(cfg.input_width));
  forward_done_ = false;
}

void MlpGradient::reset(const MlpConfig& cfg) {
  cfg.validate();
  Layout lay = make_layout(cfg);
  values_.assign(lay.total, 0.0);
  w_off_ = std::move(lay.w_off);
  b_off_ = std::move(lay.b_off);
  w_len_ = std::move(lay.w_len);
  b_len_ = std::move(lay.b_len);
}

void MlpGradient::clear() { std::fill(values_.begin(), values_.end(), 0.0); }

void MlpGradient::merge(const MlpGradient& other) {
  if (other.values_.size() != values_.size()) {
    throw std::invalid_argument("MlpGradient::merge: shape mismatch");
  }
  for (size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
}

std::span<double> MlpGradient::weights(int layer) {
  return {values_.data() + w_off_[static_cast<size_t>(layer)], w_len_[static_cast<size_t>(layer)]};
}

std::span<double> MlpGradient::biases(int layer) {
  return {values_.data() + b_off_[static_cast<size_t>(layer)], b_len_[static_cast<size_t>(layer)]};
}

Mlp::Mlp(MlpConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  Layout lay = make_layout(cfg_);
  params_.assign(lay.total, 0.0f);
  w_off_ = std::move(lay.w_off);
  b_off_ = std::move(lay.b_off);
}

void Mlp::init_params(std::uint64_t seed) {
  for (int l = 0; l < layer_count(); ++l) {
    CounterRng rng(seed, static_cast<std::uint64_t>(l));
    const double bound = std::sqrt(6.0 / static_cast<double>(cfg_.layer_input_width(l)));
    for (float& w : weights(l)) w = static_cast<float>(rng.next_double(-bound, bound));
    for (float& b : biases(l)) b = 0.0f;
  }
}

std::span<float> Mlp::weights(int layer) {
  const auto in = static_cast<size_t>(cfg_.layer_input_width(layer));
  const auto out = static_cast<size_t>(cfg_.layer_output_width(layer));
  return {params_.data() + w_off_[static_cast<size_t>(layer)], in * out};
}

std::span<const float> Mlp::weights(int layer) const {
  const auto in = static_cast<size_t>(cfg_.layer_input_width(layer));
  const auto out = static_cast<size_t>(cfg_.layer_output_width(layer));
  return {params_.data() + w_off_[static_cast<size_t>(layer)], in * out};
}

std::span<float> Mlp::biases(int layer) {
  return {params_.data() + b_off_[static_cast<size_t>(layer)],
          static_cast<size_t>(cfg_.layer_output_width(layer))};
}

std::span<const float> Mlp::biases(int layer) const {
  return {params_.data() + b_off_[static_cast<size_t>(layer)],
          static_cast<size_t>(cfg_.layer_output_width(layer))};
}

void Mlp::forward(std::span<const float> input, MlpWorkspace& ws) const {
  if (input.size() != static_cast<size_t>(cfg_.input_width)) {
    throw std::invalid_argument("mlp forward: input width mismatch");
  }
  if (ws.act_.size() != static_cast<size_t>(layer_count()) + 1) {
    throw std::invalid_argument("mlp forward: workspace shaped for a different config");
  }
  std::copy(input.begin(), input.end(), ws.act_[0].begin());
  for (int l = 0; l < layer_count(); ++l) {
    const int in = cfg_.layer_input_width(l);
    const int out = cfg_.layer_output_width(l);
    const float* w = params_.data() + w_off_[static_cast<size_t>(l)];
    const float* b = params_.data() + b_off_[static_cast<size_t>(l)];
    const float* src = ws.act_[static_cast<size_t>(l)].data();
    float* dst = ws.act_[static_cast<size_t>(l) + 1].data();
    const bool relu = l + 1 < layer_count();
    for (int o = 0; o < out; ++o) {
      double acc = static_cast<double>(b[o]);
      const float* row = w + static_cast<size_t>(o) * static_cast<size_t>(in);
      for (int i = 0; i < in; ++i) acc += static_cast<double>(row[i]) * static_cast<double>(src[i]);
      if (relu && acc < 0.0) acc = 0.0;
      dst[o] = static_cast<float>(acc);
    }
  }
  ws.forward_done_ = true;
}

void Mlp::backward(std::span<const double> upstream, MlpWorkspace& ws, MlpGradient& grad) const {
  if (!ws.forward_done_) {
    throw std::logic_error("mlp backward called before forward populated the workspace");
  }
  if (upstream.size() != static_cast<size_t>(cfg_.output_width)) {
    throw std::invalid_argument("mlp backward: upstream width mismatch");
  }
  if (grad.values().size() != params_.size()) {
    throw std::invalid_argument("mlp backward: gradient shaped for a different config");
  }
  std::copy(upstream.begin(), upstream.end(), ws.delta_cur_.begin());
  for (int l = layer_count() - 1; l >= 0; --l) {
    const int in = cfg_.layer_input_width(l);
    const int out = cfg_.layer_output_width(l);
    const float* w = params_.data() + w_off_[static_cast<size_t>(l)];
    const float* src = ws.act_[static_cast<size_t>(l)].data();
    double* dw = grad.weights(l).data();
    double* db = grad.biases(l).data();
    for (int o = 0; o < out; ++o) {
      const double d = ws.delta_cur_[static_cast<size_t>(o)];
      db[o] += d;
      double* dw_row = dw + static_cast<size_t>(o) * static_cast<size_t>(in);
      for (int i = 0; i < in; ++i) dw_row[i] += d * static_cast<double>(src[i]);
    }
    double* downstream = l > 0 ? ws.delta_next_.data() : ws.input_grad_.data();
    for (int i = 0; i < in; ++i) {
      double acc = 0.0;
      for (int o = 0; o < out; ++o) {
        acc += ws.delta_cur_[static_cast<size_t>(o)] *
               static_cast<double>(w[static_cast<size_t>(o) * static_cast<size_t>(in) + static_cast<size_t>(i)]);
      }
      // Hidden activations are post-ReLU, so a zero activation means the
      // unit was clamped and passes no gradient.
      if (l > 0 && src[i] <= 0.0f) acc = 0.0;
      downstream[i] = acc;
    }
    if (l > 0) std::swap(ws.delta_cur_, ws.delta_next_);
  }
}

}  // namespace sxen
