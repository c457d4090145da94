#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cu3d/geometry.hpp"
#include "cu3d/image.hpp"

namespace cu3d {

/// Which merge condition fired: the half-overlap rule, the absolute point
/// floor (tau_n), or both.
enum class MergeRule { half, tau_n, both };

const char* merge_rule_name(MergeRule rule);

struct PairMergeEvent {
  std::uint32_t winner = 0;    // label that absorbs
  std::uint32_t absorbed = 0;  // label that disappears
  std::size_t matched = 0;     // o_{a,b}, matched point count for the pair
  MergeRule rule = MergeRule::half;
};

struct PairCompareResult {
  LabeledPointCloud merged;  // union of both clouds, labels collapsed per merge
  std::vector<PairMergeEvent> events;
};

/// Compares two 3D masks (or unions of masks): matches points within tau_d,
/// tallies matched counts per label pair, and merges label b into label a when
/// the matched count exceeds half the smaller label's point count or exceeds
/// tau_n. Chained decisions collapse to the smallest label of each merged set.
/// Both clouds are expected to be voxel-downsampled already.
PairCompareResult compare_pair(const LabeledPointCloud& a, const LabeledPointCloud& b,
                               double tau_d, long tau_n);

/// One per-view 3D mask. All points carry label == mask_index at extraction;
/// index_set lists the (rendered id, view) addresses this mask covers.
struct MaskRecord {
  LabeledPointCloud cloud;
  std::uint32_t mask_index = 0;
  std::vector<std::pair<std::int32_t, int>> index_set;  // (rendered id, view)
};

/// All masks that share one rendered instance id, in view (timestamp) order.
struct MaskGroup {
  std::int32_t rendered_id = 0;
  std::vector<MaskRecord> records;
};

enum class MergeOrder { timestamp, shuffled };

struct DisambiguationConfig {
  double tau_d = 0.075;
  long tau_n = 50;
  MergeOrder order = MergeOrder::timestamp;
  std::uint64_t seed = 0;  // used only for MergeOrder::shuffled
};

struct MergeEvent {
  int round = 0;
  std::int32_t group_id = 0;
  std::uint32_t winner = 0;
  std::uint32_t absorbed = 0;
  std::size_t matched = 0;
  MergeRule rule = MergeRule::half;
};

/// A partition of a group's mask indices: each block is one real object.
using MaskPartition = std::vector<std::vector<std::uint32_t>>;

struct GroupResult {
  MaskPartition blocks;  // blocks sorted by smallest member, members ascending
  std::vector<MergeEvent> events;
};

/// Runs rounds of adjacent pairwise comparison over the group's masks until a
/// single cloud remains; an odd leftover passes to the next round unpaired.
/// Merge decisions accumulate in a union-find over mask indices, so the output
/// blocks partition the group's mask index set exactly.
GroupResult disambiguate_group(const MaskGroup& group, const DisambiguationConfig& config);

/// Back-projects every view, splits the cloud per instance id, assigns each
/// (id, view) mask a globally unique ordinal, voxel-downsamples it, and groups
/// the masks by rendered instance id (ascending). Per-view work may run on
/// `workers` threads; the result is identical for any worker count.
std::vector<MaskGroup> extract_mask_groups(const std::vector<InstanceMap>& fused,
                                           const std::vector<DepthMap>& depths,
                                           const CameraIntrinsics& intr,
                                           const std::vector<Pose>& poses, double voxel_size,
                                           int workers = 1);

/// Deterministic global ids for partition blocks: groups in order, blocks in
/// order, ids starting at 1.
std::vector<std::vector<std::int32_t>> block_global_ids(std::span<const MaskPartition> partitions);

/// Rewrites every referenced mask of every view with its block's global id.
/// Masks referenced by no block keep a fresh singleton id. Throws
/// ConsistencyError if a block references a mask absent from its view.
std::vector<InstanceMap> correct_maps(std::span<const MaskGroup> groups,
                                      std::span<const MaskPartition> partitions,
                                      const std::vector<InstanceMap>& fused);

/// Line-oriented text form of the merge log: one event per line with round,
/// group, winner, absorbed label, matched count and the rule that fired.
std::string format_merge_log(std::span<const MergeEvent> events);

}  // namespace cu3d
