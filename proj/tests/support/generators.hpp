// Seeded input generators shared by the unit tests and the acceptance suite.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "cu3d/disambiguation.hpp"
#include "cu3d/evaluation.hpp"
#include "cu3d/geometry.hpp"

namespace gen {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
}

inline cu3d::LabeledPointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double extent,
                                            std::uint32_t label = 1) {
  cu3d::LabeledPointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cloud.points.push_back({uniform(rng, -extent, extent), uniform(rng, -extent, extent),
                            uniform(rng, -extent, extent), label, label});
  return cloud;
}

/// A mask group whose pairwise merge decisions are independent of comparison
/// order: masks of one object always overlap far beyond the half rule, masks
/// of different objects never match at all. Returns the group plus the true
/// partition of mask ordinals by object.
struct ConsistentGroup {
  cu3d::MaskGroup group;
  cu3d::MaskPartition truth;
};

inline ConsistentGroup make_order_consistent_group(std::uint64_t seed, double tau_d = 0.075) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 1);
  const int num_objects = 1 + static_cast<int>(rng() % 5);
  const double spacing = tau_d * 1.5;  // base points never share a match
  const double jitter = tau_d * 0.2;   // per-mask copies stay within tau_d

  struct ObjectPoints {
    std::vector<std::array<double, 3>> base;
  };
  std::vector<ObjectPoints> objects(num_objects);
  for (int o = 0; o < num_objects; ++o) {
    const double ox = o * 5.0;  // objects far apart
    const int side = 5 + static_cast<int>(rng() % 3);
    for (int ix = 0; ix < side; ++ix)
      for (int iy = 0; iy < side; ++iy)
        objects[o].base.push_back({ox + ix * spacing, iy * spacing, uniform(rng, 0.0, 0.01)});
  }

  // distribute up to 16 masks over the objects, at least one each
  const int total_masks = num_objects + static_cast<int>(rng() % (17 - num_objects));
  std::vector<int> owner;
  for (int o = 0; o < num_objects; ++o) owner.push_back(o);
  while (static_cast<int>(owner.size()) < total_masks)
    owner.push_back(static_cast<int>(rng() % num_objects));
  for (std::size_t i = 0; i + 1 < owner.size(); ++i)
    std::swap(owner[i], owner[i + rng() % (owner.size() - i)]);

  ConsistentGroup out;
  out.group.rendered_id = 1;
  std::vector<std::vector<std::uint32_t>> blocks(num_objects);
  for (int m = 0; m < total_masks; ++m) {
    const std::uint32_t ordinal = static_cast<std::uint32_t>(m + 1);
    const auto& base = objects[owner[m]].base;
    // drop exactly floor(N/10) base points so any two masks of one object
    // share at least 80% of it
    std::vector<std::size_t> keep(base.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    for (std::size_t i = 0; i + 1 < keep.size(); ++i)
      std::swap(keep[i], keep[i + rng() % (keep.size() - i)]);
    keep.resize(base.size() - base.size() / 10);

    cu3d::MaskRecord record;
    record.mask_index = ordinal;
    record.index_set = {{1, m}};
    for (const std::size_t i : keep)
      record.cloud.points.push_back({base[i][0] + uniform(rng, -jitter, jitter),
                                     base[i][1] + uniform(rng, -jitter, jitter),
                                     base[i][2] + uniform(rng, -jitter, jitter), ordinal, ordinal});
    out.group.records.push_back(std::move(record));
    blocks[owner[m]].push_back(ordinal);
  }
  for (auto& b : blocks) {
    std::sort(b.begin(), b.end());
    out.truth.push_back(std::move(b));
  }
  std::sort(out.truth.begin(), out.truth.end());
  return out;
}

/// Random element labels in [0, max_label] with random confidences per id.
inline cu3d::InstancePartition random_partition(std::mt19937_64& rng, std::size_t n,
                                                std::int32_t max_label, bool with_confidence) {
  cu3d::InstancePartition p;
  p.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    p.labels.push_back(static_cast<std::int32_t>(rng() % (max_label + 1)));
  if (with_confidence)
    for (std::int32_t id = 1; id <= max_label; ++id) p.confidences[id] = uniform(rng, 0.05, 1.0);
  return p;
}

}  // namespace gen
