#include "sxen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace sxen {
namespace {

struct Worker {
  EncoderGradient enc_grad;
  MlpGradient mlp_grad;
  MlpWorkspace ws;
  std::vector<float> input;
  std::vector<double> upstream;
};

void run_chunk(const HashEncoder& encoder, const Mlp& mlp, const TrainConfig& cfg, int begin,
               int end, std::span<const double> coords, std::span<const double> aux,
               std::span<const double> targets, Worker& w, std::span<double> sample_loss) {
  const int dim = encoder.config().dim;
  const int enc_w = encoder.config().encoded_width();
  const int out_w = mlp.config().output_width;
  const double upstream_scale =
      2.0 / (static_cast<double>(targets.size()));  // d(mean sq err)/d(pred)
  for (int s = begin; s < end; ++s) {
    const auto x = coords.subspan(static_cast<size_t>(s) * static_cast<size_t>(dim),
                                  static_cast<size_t>(dim));
    encoder.encode(x, std::span<float>(w.input.data(), static_cast<size_t>(enc_w)));
    for (int a = 0; a < cfg.aux_dims; ++a) {
      w.input[static_cast<size_t>(enc_w + a)] = static_cast<float>(
          aux[static_cast<size_t>(s) * static_cast<size_t>(cfg.aux_dims) + static_cast<size_t>(a)]);
    }
    mlp.forward(w.input, w.ws);
    const auto pred = w.ws.output();
    double loss = 0.0;
    for (int o = 0; o < out_w; ++o) {
      const double e = static_cast<double>(pred[static_cast<size_t>(o)]) -
                       targets[static_cast<size_t>(s) * static_cast<size_t>(out_w) + static_cast<size_t>(o)];
      loss += e * e;
      w.upstream[static_cast<size_t>(o)] = upstream_scale * e;
    }
    sample_loss[static_cast<size_t>(s)] = loss;
    mlp.backward(w.upstream, w.ws, w.mlp_grad);
    encoder.encode_backward(x, w.ws.input_grad().first(static_cast<size_t>(enc_w)), w.enc_grad);
  }
}

}  // namespace

TrainResult train_field(HashEncoder& encoder, Mlp& mlp, const BatchSampler& sampler,
                        const TrainConfig& cfg) {
  const EncoderConfig& ec = encoder.config();
  const MlpConfig& mc = mlp.config();
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.steps < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (cfg.aux_dims < 0) throw std::invalid_argument("train: aux_dims must be >= 0");
  if (cfg.record_every < 1) throw std::invalid_argument("train: record_every must be >= 1");
  if (mc.input_width != ec.encoded_width() + cfg.aux_dims) {
    throw std::invalid_argument("train: MLP input width " + std::to_string(mc.input_width) +
                                " != encoded width " + std::to_string(ec.encoded_width()) +
                                " + aux " + std::to_string(cfg.aux_dims));
  }
  if (!sampler) throw std::invalid_argument("train: sampler must be callable");

  int threads = cfg.threads;
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.batch_size);

  const int batch = cfg.batch_size;
  const int dim = ec.dim;
  const int out_w = mc.output_width;
  std::vector<double> coords(static_cast<size_t>(batch) * static_cast<size_t>(dim));
  std::vector<double> aux(static_cast<size_t>(batch) * static_cast<size_t>(cfg.aux_dims));
  std::vector<double> targets(static_cast<size_t>(batch) * static_cast<size_t>(out_w));
  std::vector<double> sample_loss(static_cast<size_t>(batch));

  std::vector<Worker> workers(static_cast<size_t>(threads));
  for (auto& w : workers) {
    w.enc_grad.reset(ec.levels, ec.table_size, ec.features);
    w.mlp_grad.reset(mc);
    w.ws.reset(mc);
    w.input.resize(static_cast<size_t>(mc.input_width));
    w.upstream.resize(static_cast<size_t>(out_w));
  }

  SparseAdamState table_opt(ec.levels, ec.table_size, ec.features);
  AdamState mlp_opt(mlp.parameter_count());

  TrainResult result;
  const int chunk = (batch + threads - 1) / threads;
  for (int step = 0; step < cfg.steps; ++step) {
    sampler(step, coords, aux, targets);

    for (auto& w : workers) {
      w.enc_grad.clear();
      w.mlp_grad.clear();
    }
    if (threads == 1) {
      run_chunk(encoder, mlp, cfg, 0, batch, coords, aux, targets, workers[0], sample_loss);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(threads));
      for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(batch, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_chunk, std::cref(encoder), std::cref(mlp), std::cref(cfg), begin,
                          end, std::span<const double>(coords), std::span<const double>(aux),
                          std::span<const double>(targets), std::ref(workers[static_cast<size_t>(t)]),
                          std::span<double>(sample_loss));
      }
      for (auto& th : pool) th.join();
    }

    double loss = 0.0;
    for (int s = 0; s < batch; ++s) loss += sample_loss[static_cast<size_t>(s)];
    loss /= static_cast<double>(batch) * static_cast<double>(out_w);
    if (!std::isfinite(loss)) {
      throw TrainingError("loss became non-finite at step " + std::to_string(step));
    }

    for (int t = 1; t < threads; ++t) {
      workers[0].enc_grad.merge(workers[static_cast<size_t>(t)].enc_grad);
      workers[0].mlp_grad.merge(workers[static_cast<size_t>(t)].mlp_grad);
    }
    table_opt.step(encoder, workers[0].enc_grad, cfg.table_adam);
    mlp_opt.step(mlp.parameters(), workers[0].mlp_grad.values(), cfg.mlp_adam);

    if (step % cfg.record_every == 0 || step == cfg.steps - 1) {
      result.loss_curve.emplace_back(step, loss);
    }
    result.final_loss = loss;
  }
  result.steps_run = cfg.steps;
  return result;
}

}  // namespace sxen
