#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sxen/encoding.hpp"
#include "sxen/mlp.hpp"
#include "sxen/optimizer.hpp"

namespace sxen {

struct TrainConfig {
  int batch_size = 2048;
  int steps = 10000;
  int aux_dims = 0;  // extra inputs appended verbatim after the encoding
  AdamConfig table_adam{.lr = 1e-2, .beta1 = 0.9, .beta2 = 0.99, .epsilon = 1e-15};
  AdamConfig mlp_adam{.lr = 1e-3, .beta1 = 0.9, .beta2 = 0.99, .epsilon = 1e-15};
  std::uint64_t seed = 1234;  // batch-sampling seed; per-step streams derive from it
  int threads = 0;            // worker count; 0 picks the hardware concurrency
  int record_every = 100;     // loss-curve cadence in steps
};

/// Fills one training batch for `step`. Spans are caller-owned:
/// coords = batch x dim inputs in the unit cube, aux = batch x aux_dims
/// pass-through inputs (may be empty), targets = batch x output_width.
/// Called on the coordinating thread only, so implementations need no
/// internal synchronization; determinism should come from (seed, step).
using BatchSampler = std::function<void(int step, std::span<double> coords,
                                        std::span<double> aux, std::span<double> targets)>;

struct TrainResult {
  std::vector<std::pair<int, double>> loss_curve;  // (step, batch MSE before that step's update)
  double final_loss = 0.0;
  int steps_run = 0;
};

/// Jointly fits hash tables and MLP to sampled targets with mean squared
/// error. Per step: sample -> encode -> forward -> loss -> backward ->
/// adaptive-moment update on tables (sparse) and MLP (dense).
///
/// Batches fan out over `threads` workers in fixed contiguous chunks and
/// gradients merge in worker order, so results are reproducible for a fixed
/// (seed, thread count). Each worker keeps a dense table-gradient buffer,
/// trading memory for exact accumulation; fine at the scales this library
/// targets. Throws TrainingError when the loss or any gradient goes
/// non-finite, and std::invalid_argument when the encoder width plus
/// aux_dims does not match the MLP input width.
TrainResult train_field(HashEncoder& encoder, Mlp& mlp, const BatchSampler& sampler,
                        const TrainConfig& cfg);

}  // namespace sxen
