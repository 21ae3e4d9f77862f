#include "sxen/optimizer.hpp"

#include <cmath>
#include <string>

namespace sxen {
namespace {

double adam_delta(double g, double& m, double& v, const AdamConfig& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
  const double m_hat = m / bc1;
  const double v_hat = v / bc2;
  return -cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
}

}  // namespace

void AdamState::reset(size_t size) {
  m_.assign(size, 0.0);
  v_.assign(size, 0.0);
  t_ = 0;
}

void AdamState::step(std::span<float> params, std::span<const double> grads,
                     const AdamConfig& cfg) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("adam step: parameter/gradient size mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    if (!std::isfinite(g)) {
      throw TrainingError("non-finite gradient at parameter " + std::to_string(i));
    }
    params[i] = static_cast<float>(static_cast<double>(params[i]) +
                                   adam_delta(g, m_[i], v_[i], cfg, bc1, bc2));
  }
}

void SparseAdamState::reset(int levels, std::uint32_t table_size, int features) {
  if (levels < 1 || features < 1) {
    throw std::invalid_argument("sparse adam: invalid shape");
  }
  const size_t per_level = static_cast<size_t>(table_size) * static_cast<size_t>(features);
  m_.assign(static_cast<size_t>(levels), std::vector<double>(per_level, 0.0));
  v_.assign(static_cast<size_t>(levels), std::vector<double>(per_level, 0.0));
  features_ = features;
  t_ = 0;
}

void SparseAdamState::step(HashEncoder& encoder, const EncoderGradient& grads,
                           const AdamConfig& cfg) {
  const EncoderConfig& ec = encoder.config();
  if (static_cast<size_t>(ec.levels) != m_.size() || ec.features != features_ ||
      grads.levels() != ec.levels || grads.features() != ec.features) {
    throw std::invalid_argument("sparse adam step: encoder/gradient shape mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
  for (int l = 0; l < ec.levels; ++l) {
    auto table = encoder.table(l);
    auto& m = m_[static_cast<size_t>(l)];
    auto& v = v_[static_cast<size_t>(l)];
    for (std::uint32_t idx : grads.touched(l)) {
      const auto slice = grads.slice(l, idx);
      const size_t base = static_cast<size_t>(idx) * static_cast<size_t>(features_);
      for (int f = 0; f < features_; ++f) {
        const double g = slice[static_cast<size_t>(f)];
        if (!std::isfinite(g)) {
          throw TrainingError("non-finite table gradient at level " + std::to_string(l) +
                              " entry " + std::to_string(idx));
        }
        table[base + static_cast<size_t>(f)] = static_cast<float>(
            static_cast<double>(table[base + static_cast<size_t>(f)]) +
            adam_delta(g, m[base + static_cast<size_t>(f)], v[base + static_cast<size_t>(f)], cfg,
                       bc1, bc2));
      }
    }
  }
}

}  // namespace sxen
