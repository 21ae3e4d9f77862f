#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sxen/encoding.hpp"
#include "sxen/image.hpp"
#include "sxen/mlp.hpp"
#include "sxen/noise.hpp"
#include "sxen/trainer.hpp"

namespace sxen {

inline constexpr double kPsnrCap = 99.0;  // reported for vanishing MSE

/// PSNR in dB for unit-range signals: min(cap, 10*log10(1/mse)).
double psnr_from_mse(double mse);

/// Mean squared error over all channels; shapes must match.
double image_mse(const ImageDataset& a, const ImageDataset& b);
double image_psnr(const ImageDataset& a, const ImageDataset& b);

/// Evaluates the fitted model at every pixel center, clamping to [0,1].
ImageDataset render_image(const HashEncoder& encoder, const Mlp& mlp, int width, int height,
                          int threads = 0);

struct FitImageOptions {
  std::uint64_t init_seed = 42;  // table and MLP initialization
  int mlp_hidden_width = 64;
  int mlp_hidden_layers = 2;
};

struct FitImageResult {
  HashEncoder encoder;
  Mlp mlp;
  TrainResult train;
  double final_psnr = 0.0;  // rendered model vs the full target image
  std::vector<std::pair<int, double>> psnr_curve;  // per recorded step, from batch MSE
};

/// Fits pixel-center coordinates in [0,1]^2 to RGB with random pixel
/// batches. The encoder config must have dim == 2.
FitImageResult fit_image(const ImageDataset& image, const EncoderConfig& encoder_cfg,
                         const TrainConfig& train_cfg, const FitImageOptions& opt = {});

struct FitFieldOptions {
  std::uint64_t init_seed = 42;
  int mlp_hidden_width = 64;
  int mlp_hidden_layers = 2;
  int holdout_samples = 1 << 14;
};

struct FitFieldResult {
  HashEncoder encoder;
  Mlp mlp;
  TrainResult train;
  double holdout_mse = 0.0;      // fresh samples, never trained on
  double field_variance = 0.0;   // empirical target variance on the holdout
};

/// Regresses a scalar procedural-noise field over the unit cube from
/// uniformly sampled points. The encoder config must match spec.dim.
FitFieldResult fit_field(const NoiseFieldSpec& spec, const EncoderConfig& encoder_cfg,
                         const TrainConfig& train_cfg, const FitFieldOptions& opt = {});

}  // namespace sxen
