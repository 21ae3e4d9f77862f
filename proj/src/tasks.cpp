#include "sxen/tasks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "sxen/rng.hpp"

namespace sxen {
namespace {

Mlp make_head(const EncoderConfig& ec, int output_width, int hidden_width, int hidden_layers) {
  MlpConfig mc;
  mc.input_width = ec.encoded_width();
  mc.hidden_width = hidden_width;
  mc.hidden_layers = hidden_layers;
  mc.output_width = output_width;
  return Mlp(mc);
}

int resolve_threads(int threads) {
  return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

double psnr_from_mse(double mse) {
  if (!(mse > 0.0)) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double image_mse(const ImageDataset& a, const ImageDataset& b) {
  if (a.width != b.width || a.height != b.height || a.pixels.size() != b.pixels.size()) {
    throw std::invalid_argument("image_mse: shape mismatch");
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    const double e = a.pixels[i] - b.pixels[i];
    sum += e * e;
  }
  return sum / static_cast<double>(a.pixels.size());
}

double image_psnr(const ImageDataset& a, const ImageDataset& b) {
  return psnr_from_mse(image_mse(a, b));
}

ImageDataset render_image(const HashEncoder& encoder, const Mlp& mlp, int width, int height,
                          int threads) {
  if (encoder.config().dim != 2) {
    throw std::invalid_argument("render_image: encoder dim must be 2");
  }
  if (mlp.config().input_width != encoder.config().encoded_width() ||
      mlp.config().output_width != 3) {
    throw std::invalid_argument("render_image: model widths do not form a 2D->RGB map");
  }
  ImageDataset out;
  out.width = width;
  out.height = height;
  out.pixels.resize(3 * static_cast<size_t>(width) * static_cast<size_t>(height));

  const int workers = std::min(resolve_threads(threads), height);
  auto run_rows = [&](int row_begin, int row_end) {
    MlpWorkspace ws(mlp.config());
    std::vector<float> enc(static_cast<size_t>(encoder.config().encoded_width()));
    for (int yi = row_begin; yi < row_end; ++yi) {
      for (int xi = 0; xi < width; ++xi) {
        const double coords[2] = {(xi + 0.5) / width, (yi + 0.5) / height};
        encoder.encode(coords, enc);
        mlp.forward(enc, ws);
        const auto pred = ws.output();
        auto px = out.pixel(xi, yi);
        for (int c = 0; c < 3; ++c) {
          px[static_cast<size_t>(c)] = std::clamp(static_cast<double>(pred[static_cast<size_t>(c)]), 0.0, 1.0);
        }
      }
    }
  };
  if (workers <= 1) {
    run_rows(0, height);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (height + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const int begin = t * chunk;
      const int end = std::min(height, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_rows, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

FitImageResult fit_image(const ImageDataset& image, const EncoderConfig& encoder_cfg,
                         const TrainConfig& train_cfg, const FitImageOptions& opt) {
  image.validate();
  if (encoder_cfg.dim != 2) {
    throw std::invalid_argument("fit_image: encoder dim must be 2");
  }
  HashEncoder encoder(encoder_cfg);
  encoder.init_tables(opt.init_seed);
  Mlp mlp = make_head(encoder_cfg, 3, opt.mlp_hidden_width, opt.mlp_hidden_layers);
  mlp.init_params(hash_combine(opt.init_seed, 1));

  const int w = image.width;
  const int h = image.height;
  const auto pixel_count = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
  BatchSampler sampler = [&image, w, h, pixel_count, seed = train_cfg.seed](
                             int step, std::span<double> coords, std::span<double> /*aux*/,
                             std::span<double> targets) {
    CounterRng rng(seed, static_cast<std::uint64_t>(step));
    const size_t batch = coords.size() / 2;
    for (size_t s = 0; s < batch; ++s) {
      const std::uint64_t idx = rng.next_below(pixel_count);
      const int xi = static_cast<int>(idx % static_cast<std::uint64_t>(w));
      const int yi = static_cast<int>(idx / static_cast<std::uint64_t>(w));
      coords[2 * s] = (xi + 0.5) / w;
      coords[2 * s + 1] = (yi + 0.5) / h;
      const auto px = image.pixel(xi, yi);
      for (int c = 0; c < 3; ++c) targets[3 * s + static_cast<size_t>(c)] = px[static_cast<size_t>(c)];
    }
  };

  FitImageResult result{std::move(encoder), std::move(mlp), {}, 0.0, {}};
  result.train = train_field(result.encoder, result.mlp, sampler, train_cfg);
  for (const auto& [step, loss] : result.train.loss_curve) {
    result.psnr_curve.emplace_back(step, psnr_from_mse(loss));
  }
  const ImageDataset rendered =
      render_image(result.encoder, result.mlp, w, h, train_cfg.threads);
  result.final_psnr = image_psnr(rendered, image);
  return result;
}

FitFieldResult fit_field(const NoiseFieldSpec& spec, const EncoderConfig& encoder_cfg,
                         const TrainConfig& train_cfg, const FitFieldOptions& opt) {
  spec.validate();
  if (encoder_cfg.dim != spec.dim) {
    throw std::invalid_argument("fit_field: encoder dim " + std::to_string(encoder_cfg.dim) +
                                " != field dim " + std::to_string(spec.dim));
  }
  if (opt.holdout_samples < 2) {
    throw std::invalid_argument("fit_field: holdout_samples must be >= 2");
  }
  HashEncoder encoder(encoder_cfg);
  encoder.init_tables(opt.init_seed);
  Mlp mlp = make_head(encoder_cfg, 1, opt.mlp_hidden_width, opt.mlp_hidden_layers);
  mlp.init_params(hash_combine(opt.init_seed, 1));

  const int dim = spec.dim;
  BatchSampler sampler = [&spec, dim, seed = train_cfg.seed](int step, std::span<double> coords,
                                                             std::span<double> /*aux*/,
                                                             std::span<double> targets) {
    CounterRng rng(seed, static_cast<std::uint64_t>(step));
    const size_t batch = targets.size();
    for (size_t s = 0; s < batch; ++s) {
      auto x = coords.subspan(s * static_cast<size_t>(dim), static_cast<size_t>(dim));
      for (double& v : x) v = rng.next_double();
      targets[s] = noise_field_value(spec, x);
    }
  };

  FitFieldResult result{std::move(encoder), std::move(mlp), {}, 0.0, 0.0};
  result.train = train_field(result.encoder, result.mlp, sampler, train_cfg);

  // Held-out evaluation on a sampling stream training never sees.
  CounterRng holdout_rng(hash_combine(train_cfg.seed, 0x484f4c44u));
  MlpWorkspace ws(result.mlp.config());
  std::vector<float> enc(static_cast<size_t>(encoder_cfg.encoded_width()));
  std::array<double, kMaxDim> x;
  double err_sum = 0.0;
  double target_sum = 0.0;
  double target_sq_sum = 0.0;
  for (int s = 0; s < opt.holdout_samples; ++s) {
    const auto view = std::span<double>(x.data(), static_cast<size_t>(dim));
    for (double& v : view) v = holdout_rng.next_double();
    const double target = noise_field_value(spec, view);
    result.encoder.encode(view, enc);
    result.mlp.forward(enc, ws);
    const double e = static_cast<double>(ws.output()[0]) - target;
    err_sum += e * e;
    target_sum += target;
    target_sq_sum += target * target;
  }
  const double count = static_cast<double>(opt.holdout_samples);
  result.holdout_mse = err_sum / count;
  const double mean = target_sum / count;
  result.field_variance = std::max(0.0, target_sq_sum / count - mean * mean);
  return result;
}

}  // namespace sxen
