#pragma once

#include <optional>
#include <string>

#include "sxen/encoding.hpp"
#include "sxen/errors.hpp"
#include "sxen/mlp.hpp"

namespace sxen {

struct LoadedCheckpoint {
  HashEncoder encoder;
  std::optional<Mlp> mlp;
};

/// Binary checkpoint, little-endian throughout:
///   "SXEN" | version u32 | n,L,T,F,N_base u32 | growth f64 | backend u32
///   then L blocks of T*F f32 table entries.
/// When an MLP is given, an "SXML" section follows:
///   "SXML" | version u32 | layer_count,input,hidden,output u32
///   then per layer: out*in f32 weights (row-major) + out f32 biases.
/// Round trips are bit-exact.
void save_checkpoint(const std::string& path, const HashEncoder& encoder,
                     const Mlp* mlp = nullptr);

/// The level-scale mode is not part of the file (it is recorded in run
/// manifests); pass the mode the checkpoint was trained with so level
/// resolutions reconstruct identically.
LoadedCheckpoint load_checkpoint(const std::string& path,
                                 LevelScale level_scale = LevelScale::raw);

}  // namespace sxen
