#pragma once

#include <cstdint>
#include <vector>

#include "cu3d/image.hpp"

namespace cu3d {

/// Per-pixel distribution over instance slots. Slot 0 is reserved for "empty";
/// usable instance slots are 1..slots-1.
struct ProbabilityMap {
  int height = 0;
  int width = 0;
  int slots = 0;
  std::vector<float> values;  // ((row * width) + col) * slots + slot

  ProbabilityMap() = default;
  ProbabilityMap(int h, int w, int s) : height(h), width(w), slots(s) {
    if (h < 0 || w < 0 || s < 1) throw InputError("probability map dimensions invalid");
    values.assign(static_cast<std::size_t>(h) * w * s, 0.0f);
  }

  float at(int row, int col, int slot) const {
    return values[(static_cast<std::size_t>(row) * width + col) * slots + slot];
  }
  float& at(int row, int col, int slot) {
    return values[(static_cast<std::size_t>(row) * width + col) * slots + slot];
  }
};

/// Row r corresponds to instance slot u = r + 1, column c to label id t = c + 1.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  CostMatrix() = default;
  CostMatrix(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw InputError("cost matrix dimensions invalid");
    values.assign(static_cast<std::size_t>(r) * c, 0.0);
  }

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

/// Soft-IoU cost between every prediction slot and every label mask:
/// entry = -sum(y*M) / (sum(y) + sum(M) - sum(y*M)), summed over all pixels.
/// Entries lie in [-1, 0]; an empty mask against an all-zero slot gives 0.
CostMatrix siou_cost(const ProbabilityMap& pred, const InstanceMap& label);

/// Per-pixel binary cross entropy between slot activations and one-hot masks,
/// averaged over pixels. Predictions are clamped to [eps, 1-eps], eps = 1e-7,
/// so entries are finite and >= 0.
CostMatrix ce_cost(const ProbabilityMap& pred, const InstanceMap& label);

/// Minimum-cost injective assignment of every column (label) to a distinct row
/// (slot). Returns the chosen row index per column. Requires rows >= cols,
/// otherwise throws CapacityError.
std::vector<int> hungarian_assign(const CostMatrix& cost);

/// Rewrites each label mask to the rendered instance id it overlaps most
/// (ties go to the smallest id; background id 0 never competes). A mask with
/// no rendered overlap takes a fresh id from the counter. Mask supports are
/// preserved exactly; only ids change.
InstanceMap overlap_fill(const InstanceMap& label, const InstanceMap& rendered,
                         std::int32_t& next_fresh_id);

}  // namespace cu3d
