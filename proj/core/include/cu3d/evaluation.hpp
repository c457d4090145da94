#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cu3d/image.hpp"

namespace cu3d {

/// Assignment of elements (pixels, points or mask ordinals) to instance ids;
/// 0 = unassigned. Predictions may carry per-instance confidences (default 1).
struct InstancePartition {
  std::vector<std::int32_t> labels;
  std::map<std::int32_t, double> confidences;

  InstancePartition() = default;
  explicit InstancePartition(std::vector<std::int32_t> l) : labels(std::move(l)) {}
};

/// Flattens maps into one element vector (views concatenated in order).
InstancePartition partition_from_maps(std::span<const InstanceMap> maps);

struct ApResult {
  double ap = 0;    // mean over IoU thresholds 0.50:0.95:0.05
  double ap50 = 0;  // at IoU 0.50
  double ap25 = 0;  // at IoU 0.25
};

/// Class-agnostic instance AP: predictions greedily matched to ground truth in
/// descending confidence (one ground-truth object per prediction, IoU at or
/// above the threshold, the larger IoU wins ties); area under the all-point
/// interpolated precision/recall curve. Both partitions empty scores 1,
/// predictions against an empty ground truth score 0. The mean AP runs over
/// `map_thresholds` when given, else over 0.50:0.95:0.05.
double average_precision_at(const InstancePartition& pred, const InstancePartition& gt,
                            double iou_threshold);
ApResult average_precision(const InstancePartition& pred, const InstancePartition& gt,
                           std::span<const double> map_thresholds = {});

/// Adjusted Rand index over the shared element universe, in [-1, 1]. The
/// degenerate 0/0 case resolves to 1 when the partitions are identical, else 0.
double ari(const InstancePartition& pred, const InstancePartition& gt);

/// Mutual information normalized by the arithmetic mean of the entropies, in
/// [0, 1]. A zero-entropy side gives 1 if the partitions are identical, else 0.
double nmi(const InstancePartition& pred, const InstancePartition& gt);

/// Mean IoU and mean accuracy over the classes present in the ground truth
/// (class 0 = unlabeled is excluded). Returns (0, 0) when no class is present.
std::pair<double, double> miou_macc(std::span<const SemanticMap> pred,
                                    std::span<const SemanticMap> gt, int num_classes);

}  // namespace cu3d
