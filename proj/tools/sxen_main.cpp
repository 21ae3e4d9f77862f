#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sxen/analysis.hpp"
#include "sxen/checkpoint.hpp"
#include "sxen/errors.hpp"
#include "sxen/image.hpp"
#include "sxen/noise.hpp"
#include "sxen/tasks.hpp"
#include "sxen/trainer.hpp"

namespace fs = std::filesystem;
using namespace sxen;

namespace {

struct EncoderOpts {
  int levels = 8;
  int table_log2 = 16;
  int features = 2;
  int base_resolution = 16;
  double growth = 2.0;
  std::string backend = "simplex";
  std::string level_scale = "raw";
};

struct TrainOpts {
  int steps = 2000;
  int batch = 2048;
  std::uint64_t seed = 1234;
  int threads = 0;
  bool deterministic = false;
  int record_every = 100;
  double lr_tables = 1e-2;
  double lr_mlp = 1e-3;
  int mlp_hidden = 64;
  int mlp_layers = 2;
};

void add_encoder_flags(CLI::App* sub, EncoderOpts& o) {
  sub->add_option("--levels", o.levels, "Encoding levels L")->capture_default_str();
  sub->add_option("--table-size", o.table_log2, "log2 of hash-table entries per level")
      ->check(CLI::Range(4, 24))
      ->capture_default_str();
  sub->add_option("--features", o.features, "Feature width F per level")->capture_default_str();
  sub->add_option("--base-resolution", o.base_resolution, "Coarsest lattice resolution")
      ->capture_default_str();
  sub->add_option("--growth", o.growth, "Per-level resolution growth factor")
      ->capture_default_str();
  sub->add_option("--backend", o.backend, "Lattice backend")
      ->check(CLI::IsMember({"simplex", "grid"}))
      ->capture_default_str();
  sub->add_option("--level-scale", o.level_scale,
                  "Level scaling: equal-memory matches the simplex footprint to the grid's "
                  "(no-op for the grid backend)")
      ->check(CLI::IsMember({"raw", "equal-memory"}))
      ->capture_default_str();
}

void add_train_flags(CLI::App* sub, TrainOpts& o) {
  sub->add_option("--steps", o.steps, "Training steps")->capture_default_str();
  sub->add_option("--batch", o.batch, "Batch size")->capture_default_str();
  sub->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  sub->add_option("--threads", o.threads, "Worker threads (0 = auto)")->capture_default_str();
  sub->add_flag("--deterministic", o.deterministic,
                "Pin auto thread count to 1 so reruns are bit-identical");
  sub->add_option("--record-every", o.record_every, "Loss-curve cadence in steps")
      ->capture_default_str();
  sub->add_option("--lr-tables", o.lr_tables, "Adam learning rate for hash tables")
      ->capture_default_str();
  sub->add_option("--lr-mlp", o.lr_mlp, "Adam learning rate for the MLP")->capture_default_str();
  sub->add_option("--mlp-hidden", o.mlp_hidden, "MLP hidden width")->capture_default_str();
  sub->add_option("--mlp-layers", o.mlp_layers, "MLP hidden layer count")->capture_default_str();
}

EncoderConfig to_encoder_config(const EncoderOpts& o, int dim) {
  EncoderConfig ec;
  ec.dim = dim;
  ec.levels = o.levels;
  ec.table_size = 1u << o.table_log2;
  ec.features = o.features;
  ec.base_resolution = o.base_resolution;
  ec.growth = o.growth;
  ec.backend = o.backend == "simplex" ? Backend::simplex : Backend::grid;
  ec.level_scale = o.level_scale == "raw" ? LevelScale::raw : LevelScale::equal_memory;
  ec.validate();
  return ec;
}

int resolve_threads(const TrainOpts& o) {
  if (o.threads > 0) return o.threads;
  if (o.deterministic) return 1;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

TrainConfig to_train_config(const TrainOpts& o) {
  TrainConfig tc;
  tc.batch_size = o.batch;
  tc.steps = o.steps;
  tc.seed = o.seed;
  tc.threads = resolve_threads(o);
  tc.record_every = o.record_every;
  tc.table_adam.lr = o.lr_tables;
  tc.mlp_adam.lr = o.lr_mlp;
  return tc;
}

using Manifest = std::vector<std::pair<std::string, std::string>>;

/// CLI11 reads config files only when they are attached to the root command,
/// so each subcommand's --config is expanded here into equivalent tokens
/// before parsing. Keys already given on the command line are dropped (flags
/// beat the file), comma lists become repeated values, and `key=true` becomes
/// a bare flag.
std::vector<std::string> expand_config_tokens(std::vector<std::string> args) {
  size_t insert_after = 0;
  std::string file;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      insert_after = i + 1;
      file = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      insert_after = i;
      file = args[i].substr(9);
      break;
    }
  }
  if (file.empty()) return args;

  std::set<std::string> given;
  for (const std::string& a : args) {
    if (a.rfind("--", 0) == 0) {
      const size_t eq = a.find('=');
      given.insert(a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2));
    }
  }

  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file '" + file + "'");
  std::vector<std::string> extra;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw IoError("config line without '=' in '" + file + "': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "config" || given.count(key) != 0) continue;
    if (value == "false") continue;
    extra.push_back("--" + key);
    if (value == "true") continue;
    size_t start = 0;
    while (true) {
      const size_t comma = value.find(',', start);
      extra.push_back(value.substr(start, comma == std::string::npos ? std::string::npos
                                                                     : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_after) + 1, extra.begin(),
              extra.end());
  return args;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_encoder_manifest(Manifest& m, const EncoderOpts& o) {
  m.emplace_back("levels", std::to_string(o.levels));
  m.emplace_back("table-size", std::to_string(o.table_log2));
  m.emplace_back("features", std::to_string(o.features));
  m.emplace_back("base-resolution", std::to_string(o.base_resolution));
  m.emplace_back("growth", fmt17(o.growth));
  m.emplace_back("backend", o.backend);
  m.emplace_back("level-scale", o.level_scale);
}

void append_train_manifest(Manifest& m, const TrainOpts& o) {
  m.emplace_back("steps", std::to_string(o.steps));
  m.emplace_back("batch", std::to_string(o.batch));
  m.emplace_back("seed", std::to_string(o.seed));
  m.emplace_back("threads", std::to_string(resolve_threads(o)));
  m.emplace_back("record-every", std::to_string(o.record_every));
  m.emplace_back("lr-tables", fmt17(o.lr_tables));
  m.emplace_back("lr-mlp", fmt17(o.lr_mlp));
  m.emplace_back("mlp-hidden", std::to_string(o.mlp_hidden));
  m.emplace_back("mlp-layers", std::to_string(o.mlp_layers));
}

/// The manifest doubles as a config file: feeding it back through --config
/// reproduces the run (thread count is recorded resolved).
void write_manifest(const fs::path& dir, const std::string& subcommand, const Manifest& entries) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path path = dir / "manifest.txt";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << "# sxen run manifest\n# subcommand: " << subcommand << "\n";
  for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_curve_csv(const fs::path& path, const std::vector<std::pair<int, double>>& loss,
                     const std::vector<std::pair<int, double>>* psnr) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << (psnr != nullptr ? "step,loss,psnr_db\n" : "step,loss\n");
  for (size_t i = 0; i < loss.size(); ++i) {
    out << loss[i].first << "," << fmt17(loss[i].second);
    if (psnr != nullptr) out << "," << fmt17((*psnr)[i].second);
    out << "\n";
  }
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// ---- fit-image ------------------------------------------------------------

struct FitImageOpts {
  std::string input;  // empty -> procedural test image
  int synthetic_size = 512;
  std::uint64_t synthetic_seed = 7;
  std::uint64_t init_seed = 42;
  std::string output_dir = "sxen-out";
  EncoderOpts enc;
  TrainOpts train;
};

int run_fit_image(const FitImageOpts& o) {
  const EncoderConfig ec = to_encoder_config(o.enc, 2);
  const TrainConfig tc = to_train_config(o.train);

  ImageDataset image = o.input.empty()
                           ? make_test_image(o.synthetic_size, o.synthetic_size, o.synthetic_seed)
                           : load_png(o.input);

  Manifest m;
  m.emplace_back("input", o.input);
  m.emplace_back("synthetic-size", std::to_string(o.synthetic_size));
  m.emplace_back("synthetic-seed", std::to_string(o.synthetic_seed));
  m.emplace_back("init-seed", std::to_string(o.init_seed));
  m.emplace_back("output-dir", o.output_dir);
  append_encoder_manifest(m, o.enc);
  append_train_manifest(m, o.train);
  write_manifest(o.output_dir, "fit-image", m);

  FitImageOptions fit_opt;
  fit_opt.init_seed = o.init_seed;
  fit_opt.mlp_hidden_width = o.train.mlp_hidden;
  fit_opt.mlp_hidden_layers = o.train.mlp_layers;
  FitImageResult result = fit_image(image, ec, tc, fit_opt);

  const fs::path dir(o.output_dir);
  write_curve_csv(dir / "loss_psnr.csv", result.train.loss_curve, &result.psnr_curve);
  save_png((dir / "reconstruction.png").string(),
           render_image(result.encoder, result.mlp, image.width, image.height, tc.threads));
  save_checkpoint((dir / "model.ckpt").string(), result.encoder, &result.mlp);

  std::cout << "image=" << image.width << "x" << image.height << "\n"
            << "backend=" << to_string(ec.backend) << "\n"
            << "steps=" << result.train.steps_run << "\n"
            << "final_psnr_db=" << result.final_psnr << "\n"
            << "output_dir=" << o.output_dir << std::endl;
  return 0;
}

// ---- fit-field ------------------------------------------------------------

struct FitFieldOpts {
  int dim = 3;
  std::string noise = "perlin";
  int octaves = 1;
  double frequency = 4.0;
  std::uint64_t field_seed = 7;
  std::uint64_t init_seed = 42;
  int holdout = 1 << 14;
  std::string output_dir = "sxen-out";
  EncoderOpts enc;
  TrainOpts train;
};

int run_fit_field(const FitFieldOpts& o) {
  const EncoderConfig ec = to_encoder_config(o.enc, o.dim);
  const TrainConfig tc = to_train_config(o.train);
  NoiseFieldSpec spec;
  spec.dim = o.dim;
  spec.seed = o.field_seed;
  spec.kind = o.noise == "perlin" ? NoiseKind::perlin : NoiseKind::simplex;
  spec.octaves = o.octaves;
  spec.frequency = o.frequency;
  spec.validate();

  Manifest m;
  m.emplace_back("dimension", std::to_string(o.dim));
  m.emplace_back("noise", o.noise);
  m.emplace_back("octaves", std::to_string(o.octaves));
  m.emplace_back("frequency", fmt17(o.frequency));
  m.emplace_back("field-seed", std::to_string(o.field_seed));
  m.emplace_back("init-seed", std::to_string(o.init_seed));
  m.emplace_back("holdout", std::to_string(o.holdout));
  m.emplace_back("output-dir", o.output_dir);
  append_encoder_manifest(m, o.enc);
  append_train_manifest(m, o.train);
  write_manifest(o.output_dir, "fit-field", m);

  FitFieldOptions fit_opt;
  fit_opt.init_seed = o.init_seed;
  fit_opt.mlp_hidden_width = o.train.mlp_hidden;
  fit_opt.mlp_hidden_layers = o.train.mlp_layers;
  fit_opt.holdout_samples = o.holdout;
  FitFieldResult result = fit_field(spec, ec, tc, fit_opt);

  const fs::path dir(o.output_dir);
  write_curve_csv(dir / "loss.csv", result.train.loss_curve, nullptr);
  save_checkpoint((dir / "model.ckpt").string(), result.encoder, &result.mlp);

  std::cout << "dimension=" << o.dim << "\n"
            << "backend=" << to_string(ec.backend) << "\n"
            << "steps=" << result.train.steps_run << "\n"
            << "holdout_mse=" << fmt17(result.holdout_mse) << "\n"
            << "field_variance=" << fmt17(result.field_variance) << "\n"
            << "output_dir=" << o.output_dir << std::endl;
  return 0;
}

// ---- bench-kernel ----------------------------------------------------------

struct BenchOpts {
  std::vector<int> dims = {2, 3, 4, 5, 6, 7};
  std::string backend = "both";
  std::uint64_t cells = 1ull << 21;
  bool full_scale = false;
  int samples = 1 << 10;
  int reps = 1000;
  int table_log2 = 19;
  int features = 2;
  std::uint64_t seed = 99;
  bool json = false;
  std::string output_dir = "sxen-out";
};

int run_bench(const BenchOpts& o) {
  Manifest m;
  std::string dims_str;
  for (int d : o.dims) dims_str += (dims_str.empty() ? "" : ",") + std::to_string(d);
  m.emplace_back("dimensions", dims_str);
  m.emplace_back("backend", o.backend);
  m.emplace_back("cells", std::to_string(o.full_scale ? (1ull << 27) : o.cells));
  m.emplace_back("samples", std::to_string(o.samples));
  m.emplace_back("reps", std::to_string(o.reps));
  m.emplace_back("table-size", std::to_string(o.table_log2));
  m.emplace_back("features", std::to_string(o.features));
  m.emplace_back("seed", std::to_string(o.seed));
  m.emplace_back("output-dir", o.output_dir);
  write_manifest(o.output_dir, "bench-kernel", m);

  std::vector<Backend> backends;
  if (o.backend == "both" || o.backend == "simplex") backends.push_back(Backend::simplex);
  if (o.backend == "both" || o.backend == "grid") backends.push_back(Backend::grid);

  std::vector<KernelBenchReport> rows;
  for (int n : o.dims) {
    for (Backend b : backends) {
      KernelBenchConfig cfg;
      cfg.n = n;
      cfg.cells = o.full_scale ? (1ull << 27) : o.cells;
      cfg.samples = o.samples;
      cfg.reps = o.reps;
      cfg.backend = b;
      cfg.table_size = 1u << o.table_log2;
      cfg.features = o.features;
      cfg.seed = o.seed;
      rows.push_back(bench_kernel(cfg));
      const auto& r = rows.back();
      std::cout << "n=" << r.n << " backend=" << to_string(r.backend) << " cells=" << r.cells
                << " reps=" << r.reps << " seconds=" << fmt17(r.seconds)
                << " vertices_per_sample=" << r.vertices_per_sample << std::endl;
    }
  }

  const fs::path dir(o.output_dir);
  write_kernel_csv((dir / "kernel_bench.csv").string(), rows);
  if (o.json) write_kernel_json((dir / "kernel_bench.json").string(), rows);
  return 0;
}

// ---- analyze-memory ---------------------------------------------------------

struct AnalyzeOpts {
  std::vector<int> dims = {2, 3, 4};
  std::vector<int> resolutions = {2, 4, 8, 16, 32, 64, 128};
  std::uint64_t samples = 4'000'000;
  std::uint64_t seed = 1234;
  bool json = false;
  std::string output_dir = "sxen-out";
};

int run_analyze(const AnalyzeOpts& o) {
  Manifest m;
  std::string dims_str, res_str;
  for (int d : o.dims) dims_str += (dims_str.empty() ? "" : ",") + std::to_string(d);
  for (int r : o.resolutions) res_str += (res_str.empty() ? "" : ",") + std::to_string(r);
  m.emplace_back("dimensions", dims_str);
  m.emplace_back("resolutions", res_str);
  m.emplace_back("samples", std::to_string(o.samples));
  m.emplace_back("seed", std::to_string(o.seed));
  m.emplace_back("output-dir", o.output_dir);
  write_manifest(o.output_dir, "analyze-memory", m);

  std::vector<UtilizationReport> rows;
  for (int n : o.dims) {
    for (int res : o.resolutions) {
      try {
        rows.push_back(utilization_estimate(n, res, o.samples, o.seed));
      } catch (const std::invalid_argument& e) {
        std::cerr << "analyze-memory: skipping n=" << n << " level=" << res << ": " << e.what()
                  << std::endl;
        continue;
      }
      const auto& r = rows.back();
      std::cout << "n=" << r.n << " level=" << r.level << " estimate_pct=" << r.estimate_pct
                << " bound_pct=" << r.bound_pct << std::endl;
    }
  }

  const fs::path dir(o.output_dir);
  write_utilization_csv((dir / "utilization.csv").string(), rows);
  if (o.json) write_utilization_json((dir / "utilization.json").string(), rows);
  return 0;
}

// ---- noise-gen --------------------------------------------------------------

struct NoiseGenOpts {
  int resolution = 256;
  std::string noise = "simplex";
  int octaves = 1;
  double frequency = 4.0;
  std::uint64_t field_seed = 7;
  std::string output_dir = "sxen-out";
};

int run_noise_gen(const NoiseGenOpts& o) {
  NoiseFieldSpec spec;
  spec.dim = 2;
  spec.seed = o.field_seed;
  spec.kind = o.noise == "perlin" ? NoiseKind::perlin : NoiseKind::simplex;
  spec.octaves = o.octaves;
  spec.frequency = o.frequency;
  spec.validate();
  if (o.resolution < 1 || o.resolution > 8192) {
    throw std::invalid_argument("noise-gen: resolution must be in [1, 8192]");
  }

  Manifest m;
  m.emplace_back("resolution", std::to_string(o.resolution));
  m.emplace_back("noise", o.noise);
  m.emplace_back("octaves", std::to_string(o.octaves));
  m.emplace_back("frequency", fmt17(o.frequency));
  m.emplace_back("field-seed", std::to_string(o.field_seed));
  m.emplace_back("output-dir", o.output_dir);
  write_manifest(o.output_dir, "noise-gen", m);

  ImageDataset img;
  img.width = o.resolution;
  img.height = o.resolution;
  img.pixels.resize(3 * static_cast<size_t>(o.resolution) * static_cast<size_t>(o.resolution));
  for (int yi = 0; yi < o.resolution; ++yi) {
    for (int xi = 0; xi < o.resolution; ++xi) {
      const double coords[2] = {(xi + 0.5) / o.resolution, (yi + 0.5) / o.resolution};
      const double v = std::clamp(0.5 + 0.5 * noise_field_value(spec, coords), 0.0, 1.0);
      auto px = img.pixel(xi, yi);
      px[0] = px[1] = px[2] = v;
    }
  }
  save_png((fs::path(o.output_dir) / "noise.png").string(), img);
  std::cout << "noise=" << o.noise << "\nresolution=" << o.resolution
            << "\noutput_dir=" << o.output_dir << std::endl;
  return 0;
}

// ---- inspect ----------------------------------------------------------------

struct InspectOpts {
  std::string checkpoint;
  std::string level_scale = "raw";
};

int run_inspect(const InspectOpts& o) {
  const LevelScale ls = o.level_scale == "raw" ? LevelScale::raw : LevelScale::equal_memory;
  LoadedCheckpoint ckpt = load_checkpoint(o.checkpoint, ls);
  const EncoderConfig& ec = ckpt.encoder.config();
  std::cout << "checkpoint=" << o.checkpoint << "\n"
            << "backend=" << to_string(ec.backend) << "\n"
            << "dimension=" << ec.dim << "\n"
            << "levels=" << ec.levels << "\n"
            << "table_size=" << ec.table_size << "\n"
            << "features=" << ec.features << "\n"
            << "base_resolution=" << ec.base_resolution << "\n"
            << "growth=" << fmt17(ec.growth) << "\n"
            << "level_scale=" << to_string(ec.level_scale) << "\n"
            << "table_parameters=" << ckpt.encoder.parameter_count() << "\n";
  for (int l = 0; l < ec.levels; ++l) {
    const auto table = ckpt.encoder.table(l);
    double lo = table.empty() ? 0.0 : table[0];
    double hi = lo;
    double sum = 0.0;
    for (float v : table) {
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
      sum += static_cast<double>(v);
    }
    std::cout << "level_" << l << "_resolution=" << ckpt.encoder.resolution(l) << " min="
              << fmt17(lo) << " max=" << fmt17(hi)
              << " mean=" << fmt17(table.empty() ? 0.0 : sum / static_cast<double>(table.size()))
              << "\n";
  }
  if (ckpt.mlp.has_value()) {
    const MlpConfig& mc = ckpt.mlp->config();
    std::cout << "mlp_layers=" << mc.layer_count() << "\n"
              << "mlp_input=" << mc.input_width << "\n"
              << "mlp_hidden=" << mc.hidden_width << "\n"
              << "mlp_output=" << mc.output_width << "\n"
              << "mlp_parameters=" << ckpt.mlp->parameter_count() << "\n";
  } else {
    std::cout << "mlp=none\n";
  }
  std::cout.flush();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simplex-lattice multiresolution hash encoding toolkit"};
  app.name("sxen");
  app.require_subcommand(1);

  FitImageOpts fi;
  auto* fit_image_cmd = app.add_subcommand(
      "fit-image", "Fit a 2D->RGB neural field to a PNG (or a procedural test image)");
  fit_image_cmd->set_config("--config", "", "key=value file; flags override it");
  fit_image_cmd->add_option("--input", fi.input, "Input PNG; omit to use the procedural image");
  fit_image_cmd->add_option("--synthetic-size", fi.synthetic_size, "Procedural image side length")
      ->capture_default_str();
  fit_image_cmd->add_option("--synthetic-seed", fi.synthetic_seed, "Procedural image seed")
      ->capture_default_str();
  fit_image_cmd->add_option("--init-seed", fi.init_seed, "Table/MLP init seed")
      ->capture_default_str();
  fit_image_cmd->add_option("--output-dir", fi.output_dir, "Artifact directory")
      ->capture_default_str();
  add_encoder_flags(fit_image_cmd, fi.enc);
  add_train_flags(fit_image_cmd, fi.train);

  FitFieldOpts ff;
  auto* fit_field_cmd =
      app.add_subcommand("fit-field", "Regress an n-dimensional procedural noise field");
  fit_field_cmd->set_config("--config", "", "key=value file; flags override it");
  fit_field_cmd->add_option("--dimension", ff.dim, "Field dimension n")
      ->check(CLI::Range(1, 8))
      ->capture_default_str();
  fit_field_cmd->add_option("--noise", ff.noise, "Noise kind")
      ->check(CLI::IsMember({"perlin", "simplex"}))
      ->capture_default_str();
  fit_field_cmd->add_option("--octaves", ff.octaves, "Octave count")->capture_default_str();
  fit_field_cmd->add_option("--frequency", ff.frequency, "Base lattice frequency")
      ->capture_default_str();
  fit_field_cmd->add_option("--field-seed", ff.field_seed, "Noise field seed")
      ->capture_default_str();
  fit_field_cmd->add_option("--init-seed", ff.init_seed, "Table/MLP init seed")
      ->capture_default_str();
  fit_field_cmd->add_option("--holdout", ff.holdout, "Held-out sample count")
      ->capture_default_str();
  fit_field_cmd->add_option("--output-dir", ff.output_dir, "Artifact directory")
      ->capture_default_str();
  add_encoder_flags(fit_field_cmd, ff.enc);
  add_train_flags(fit_field_cmd, ff.train);

  BenchOpts bk;
  auto* bench_cmd = app.add_subcommand("bench-kernel", "Time the encode hot loop per dimension");
  bench_cmd->set_config("--config", "", "key=value file; flags override it");
  bench_cmd->add_option("--dimensions", bk.dims, "Dimensions to bench")->capture_default_str();
  bench_cmd->add_option("--backend", bk.backend, "Backend selection")
      ->check(CLI::IsMember({"simplex", "grid", "both"}))
      ->capture_default_str();
  bench_cmd->add_option("--cells", bk.cells, "Lattice cell budget (resolution = floor(cells^(1/n)))")
      ->capture_default_str();
  bench_cmd->add_flag("--full-scale", bk.full_scale, "Use the full 2^27-cell protocol");
  bench_cmd->add_option("--samples", bk.samples, "Sample points per repetition")
      ->capture_default_str();
  bench_cmd->add_option("--reps", bk.reps, "Repetitions of the sample sweep")
      ->capture_default_str();
  bench_cmd->add_option("--table-size", bk.table_log2, "log2 hash-table entries")
      ->check(CLI::Range(4, 24))
      ->capture_default_str();
  bench_cmd->add_option("--features", bk.features, "Feature width")->capture_default_str();
  bench_cmd->add_option("--seed", bk.seed, "Sample-point seed")->capture_default_str();
  bench_cmd->add_flag("--json", bk.json, "Also write plot-ready JSON");
  bench_cmd->add_option("--output-dir", bk.output_dir, "Artifact directory")
      ->capture_default_str();

  AnalyzeOpts am;
  auto* analyze_cmd = app.add_subcommand(
      "analyze-memory", "Analytic memory bounds and Monte-Carlo utilization estimates");
  analyze_cmd->set_config("--config", "", "key=value file; flags override it");
  analyze_cmd->add_option("--dimensions", am.dims, "Dimensions to analyze")
      ->capture_default_str();
  analyze_cmd->add_option("--resolutions", am.resolutions, "Lattice resolutions per dimension")
      ->capture_default_str();
  analyze_cmd->add_option("--samples", am.samples, "Monte-Carlo samples per estimate")
      ->capture_default_str();
  analyze_cmd->add_option("--seed", am.seed, "Sampling seed")->capture_default_str();
  analyze_cmd->add_flag("--json", am.json, "Also write plot-ready JSON");
  analyze_cmd->add_option("--output-dir", am.output_dir, "Artifact directory")
      ->capture_default_str();

  NoiseGenOpts ng;
  auto* noise_cmd = app.add_subcommand("noise-gen", "Render a 2D noise field to PNG");
  noise_cmd->set_config("--config", "", "key=value file; flags override it");
  noise_cmd->add_option("--resolution", ng.resolution, "Image side length")
      ->capture_default_str();
  noise_cmd->add_option("--noise", ng.noise, "Noise kind")
      ->check(CLI::IsMember({"perlin", "simplex"}))
      ->capture_default_str();
  noise_cmd->add_option("--octaves", ng.octaves, "Octave count")->capture_default_str();
  noise_cmd->add_option("--frequency", ng.frequency, "Base lattice frequency")
      ->capture_default_str();
  noise_cmd->add_option("--field-seed", ng.field_seed, "Noise seed")->capture_default_str();
  noise_cmd->add_option("--output-dir", ng.output_dir, "Artifact directory")
      ->capture_default_str();

  InspectOpts in;
  auto* inspect_cmd = app.add_subcommand("inspect", "Describe a checkpoint file");
  inspect_cmd->add_option("checkpoint", in.checkpoint, "Checkpoint path")->required();
  inspect_cmd->add_option("--level-scale", in.level_scale,
                          "Level-scale mode the checkpoint was trained with")
      ->check(CLI::IsMember({"raw", "equal-memory"}))
      ->capture_default_str();

  int rc = 0;
  fit_image_cmd->callback([&] { rc = run_fit_image(fi); });
  fit_field_cmd->callback([&] { rc = run_fit_field(ff); });
  bench_cmd->callback([&] { rc = run_bench(bk); });
  analyze_cmd->callback([&] { rc = run_analyze(am); });
  noise_cmd->callback([&] { rc = run_noise_gen(ng); });
  inspect_cmd->callback([&] { rc = run_inspect(in); });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config_tokens(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes token vectors from the back
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (dynamic_cast<const CLI::CallForHelp*>(&e) != nullptr ||
        dynamic_cast<const CLI::CallForAllHelp*>(&e) != nullptr ||
        dynamic_cast<const CLI::CallForVersion*>(&e) != nullptr) {
      return code;
    }
    std::cerr << app.help() << std::flush;
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << std::endl;
    return 4;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << std::endl;
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return rc;
}
