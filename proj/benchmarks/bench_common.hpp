#pragma once

#include <random>

#include "cu3d/geometry.hpp"

namespace bench {

inline cu3d::LabeledPointCloud random_cloud(std::size_t n, double extent, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
  };
  cu3d::LabeledPointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.push_back({uniform(-extent, extent), uniform(-extent, extent),
                            uniform(-extent, extent), static_cast<std::uint32_t>(1 + i % 4),
                            static_cast<std::uint32_t>(1 + i % 4)});
  return cloud;
}

}  // namespace bench
