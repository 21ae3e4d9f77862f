#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sxen {

/// Row-major RGB raster with channel values as reals in [0,1].
struct ImageDataset {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // width*height*3, interleaved RGB

  std::span<double> pixel(int xi, int yi) {
    return {pixels.data() + 3 * (static_cast<size_t>(yi) * static_cast<size_t>(width) +
                                 static_cast<size_t>(xi)),
            3};
  }
  std::span<const double> pixel(int xi, int yi) const {
    return {pixels.data() + 3 * (static_cast<size_t>(yi) * static_cast<size_t>(width) +
                                 static_cast<size_t>(xi)),
            3};
  }

  /// Throws std::invalid_argument on inconsistent shape or values outside [0,1].
  void validate() const;
};

/// Reads an 8-bit PNG (gray, palette, RGB, or RGBA — all normalized to RGB;
/// 16-bit files are reduced). Stored values map linearly to [0,1].
ImageDataset load_png(const std::string& path);

/// Writes 8-bit RGB; values are clamped to [0,1] and rounded.
void save_png(const std::string& path, const ImageDataset& image);

/// Deterministic multi-octave procedural image so experiments need no
/// bundled binary assets.
ImageDataset make_test_image(int width, int height, std::uint64_t seed);

}  // namespace sxen
