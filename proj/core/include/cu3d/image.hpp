#pragma once

#include <cstdint>
#include <vector>

#include "cu3d/errors.hpp"

namespace cu3d {

/// Dense row-major H x W grid of per-pixel values.
template <typename T>
struct Image {
  int height = 0;
  int width = 0;
  std::vector<T> pixels;

  Image() = default;
  Image(int h, int w, T fill = T{}) : height(h), width(w) {
    if (h < 0 || w < 0) throw InputError("image dimensions must be non-negative");
    pixels.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill);
  }

  T& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  const T& at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }

  std::size_t size() const { return pixels.size(); }
  bool same_shape(const Image& other) const { return height == other.height && width == other.width; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.height == b.height && a.width == b.width && a.pixels == b.pixels;
  }
};

/// Metric depth in meters; 0 marks an invalid pixel.
using DepthMap = Image<float>;

/// Per-pixel instance IDs; 0 = empty/background.
using InstanceMap = Image<std::int32_t>;

/// Per-pixel semantic class IDs; 0 = unlabeled.
using SemanticMap = Image<std::int32_t>;

/// Largest pixel value in a map (0 for an empty map).
template <typename T>
T max_value(const Image<T>& img) {
  T best = T{};
  for (const T& v : img.pixels)
    if (v > best) best = v;
  return best;
}

}  // namespace cu3d
