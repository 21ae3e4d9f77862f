#include "sxen/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace sxen {
namespace {

constexpr std::uint32_t kEncoderVersion = 1;
constexpr std::uint32_t kMlpVersion = 1;
constexpr char kEncoderMagic[4] = {'S', 'X', 'E', 'N'};
constexpr char kMlpMagic[4] = {'S', 'X', 'M', 'L'};

void write_bytes(std::ostream& out, const void* data, size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("checkpoint write failed");
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  write_bytes(out, b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  write_u32(out, static_cast<std::uint32_t>(v));
  write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

void write_f32_block(std::ostream& out, std::span<const float> block) {
  if constexpr (std::endian::native == std::endian::little) {
    write_bytes(out, block.data(), block.size() * sizeof(float));
  } else {
    for (float v : block) write_u32(out, std::bit_cast<std::uint32_t>(v));
  }
}

void read_bytes(std::istream& in, void* data, size_t size) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (!in) throw IoError("checkpoint truncated or unreadable");
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  read_bytes(in, b, 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in) {
  const std::uint64_t lo = read_u32(in);
  const std::uint64_t hi = read_u32(in);
  return lo | (hi << 32);
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

void read_f32_block(std::istream& in, std::span<float> block) {
  if constexpr (std::endian::native == std::endian::little) {
    read_bytes(in, block.data(), block.size() * sizeof(float));
  } else {
    for (float& v : block) v = std::bit_cast<float>(read_u32(in));
  }
}

void expect_magic(std::istream& in, const char (&magic)[4], const char* what) {
  char got[4];
  read_bytes(in, got, 4);
  if (std::memcmp(got, magic, 4) != 0) {
    throw IoError(std::string("checkpoint: bad ") + what + " section magic");
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const HashEncoder& encoder, const Mlp* mlp) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  const EncoderConfig& ec = encoder.config();
  write_bytes(out, kEncoderMagic, 4);
  write_u32(out, kEncoderVersion);
  write_u32(out, static_cast<std::uint32_t>(ec.dim));
  write_u32(out, static_cast<std::uint32_t>(ec.levels));
  write_u32(out, ec.table_size);
  write_u32(out, static_cast<std::uint32_t>(ec.features));
  write_u32(out, static_cast<std::uint32_t>(ec.base_resolution));
  write_f64(out, ec.growth);
  write_u32(out, ec.backend == Backend::simplex ? 0u : 1u);
  for (int l = 0; l < ec.levels; ++l) write_f32_block(out, encoder.table(l));

  if (mlp != nullptr) {
    const MlpConfig& mc = mlp->config();
    write_bytes(out, kMlpMagic, 4);
    write_u32(out, kMlpVersion);
    write_u32(out, static_cast<std::uint32_t>(mc.layer_count()));
    write_u32(out, static_cast<std::uint32_t>(mc.input_width));
    write_u32(out, static_cast<std::uint32_t>(mc.hidden_width));
    write_u32(out, static_cast<std::uint32_t>(mc.output_width));
    for (int l = 0; l < mc.layer_count(); ++l) {
      write_f32_block(out, mlp->weights(l));
      write_f32_block(out, mlp->biases(l));
    }
  }
  out.flush();
  if (!out) throw IoError("checkpoint write failed");
}

LoadedCheckpoint load_checkpoint(const std::string& path, LevelScale level_scale) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  expect_magic(in, kEncoderMagic, "encoder");
  const std::uint32_t version = read_u32(in);
  if (version != kEncoderVersion) {
    throw IoError("checkpoint: unsupported encoder section version " + std::to_string(version));
  }
  EncoderConfig ec;
  ec.dim = static_cast<int>(read_u32(in));
  ec.levels = static_cast<int>(read_u32(in));
  ec.table_size = read_u32(in);
  ec.features = static_cast<int>(read_u32(in));
  ec.base_resolution = static_cast<int>(read_u32(in));
  ec.growth = read_f64(in);
  const std::uint32_t backend_tag = read_u32(in);
  if (backend_tag > 1) throw IoError("checkpoint: unknown backend tag");
  ec.backend = backend_tag == 0 ? Backend::simplex : Backend::grid;
  ec.level_scale = level_scale;
  try {
    ec.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("checkpoint: invalid encoder config: ") + e.what());
  }

  HashEncoder encoder(ec);
  for (int l = 0; l < ec.levels; ++l) read_f32_block(in, encoder.table(l));

  LoadedCheckpoint result{std::move(encoder), std::nullopt};
  if (in.peek() == std::char_traits<char>::eof()) return result;

  expect_magic(in, kMlpMagic, "mlp");
  const std::uint32_t mlp_version = read_u32(in);
  if (mlp_version != kMlpVersion) {
    throw IoError("checkpoint: unsupported mlp section version " + std::to_string(mlp_version));
  }
  MlpConfig mc;
  const std::uint32_t layer_count = read_u32(in);
  mc.input_width = static_cast<int>(read_u32(in));
  mc.hidden_width = static_cast<int>(read_u32(in));
  mc.output_width = static_cast<int>(read_u32(in));
  if (layer_count < 1) throw IoError("checkpoint: mlp layer count must be >= 1");
  mc.hidden_layers = static_cast<int>(layer_count) - 1;
  try {
    mc.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("checkpoint: invalid mlp config: ") + e.what());
  }
  Mlp mlp(mc);
  for (int l = 0; l < mc.layer_count(); ++l) {
    read_f32_block(in, mlp.weights(l));
    read_f32_block(in, mlp.biases(l));
  }
  // A trailing read may have consumed the final byte exactly; only a failed
  // read above would have thrown. Reject trailing garbage.
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("checkpoint: trailing bytes after mlp section");
  }
  result.mlp.emplace(std::move(mlp));
  return result;
}

}  // namespace sxen
