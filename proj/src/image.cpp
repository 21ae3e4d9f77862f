#include "sxen/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sxen/errors.hpp"
#include "sxen/noise.hpp"
#include "sxen/rng.hpp"

namespace sxen {

void ImageDataset::validate() const {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image: width and height must be >= 1");
  }
  if (pixels.size() != 3 * static_cast<size_t>(width) * static_cast<size_t>(height)) {
    throw std::invalid_argument("image: pixel buffer size != width*height*3");
  }
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("image: pixel values must lie in [0, 1]");
    }
  }
}

ImageDataset load_png(const std::string& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot read PNG '" + path + "': " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("cannot decode PNG '" + path + "': " + img.message);
  }
  ImageDataset out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.pixels.resize(buffer.size());
  for (size_t i = 0; i < buffer.size(); ++i) out.pixels[i] = buffer[i] / 255.0;
  return out;
}

void save_png(const std::string& path, const ImageDataset& image) {
  image.validate();
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buffer(image.pixels.size());
  for (size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<unsigned char>(
        std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  }
  if (!png_image_write_to_file(&img, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path + "': " + img.message);
  }
}

ImageDataset make_test_image(int width, int height, std::uint64_t seed) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("test image: width and height must be >= 1");
  }
  NoiseFieldSpec shared{.dim = 2, .seed = hash_combine(seed, 0xABu), .kind = NoiseKind::perlin,
                        .octaves = 4, .frequency = 4.0};
  std::array<NoiseFieldSpec, 3> channel;
  for (int c = 0; c < 3; ++c) {
    channel[static_cast<size_t>(c)] =
        NoiseFieldSpec{.dim = 2, .seed = hash_combine(seed, static_cast<std::uint64_t>(c + 1)),
                       .kind = NoiseKind::perlin, .octaves = 5, .frequency = 8.0};
  }
  ImageDataset out;
  out.width = width;
  out.height = height;
  out.pixels.resize(3 * static_cast<size_t>(width) * static_cast<size_t>(height));
  for (int yi = 0; yi < height; ++yi) {
    for (int xi = 0; xi < width; ++xi) {
      const double coords[2] = {(xi + 0.5) / width, (yi + 0.5) / height};
      const double base = noise_field_value(shared, coords);
      auto px = out.pixel(xi, yi);
      for (int c = 0; c < 3; ++c) {
        const double v = 0.45 * base + 0.55 * noise_field_value(channel[static_cast<size_t>(c)], coords);
        px[static_cast<size_t>(c)] = std::clamp(0.5 + 0.62 * v, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace sxen
