#include "cu3d/disambiguation.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cu3d/parallel.hpp"
#include "cu3d/union_find.hpp"

namespace cu3d {

const char* merge_rule_name(MergeRule rule) {
  switch (rule) {
    case MergeRule::half: return "half";
    case MergeRule::tau_n: return "tau_n";
    case MergeRule::both: return "both";
  }
  return "?";
}

PairCompareResult compare_pair(const LabeledPointCloud& a, const LabeledPointCloud& b,
                               double tau_d, long tau_n) {
  if (tau_n < 0) throw InputError("compare_pair: tau_n must be non-negative");
  const auto pairs = radius_match(a, b, tau_d);

  std::map<std::uint32_t, std::size_t> count_a, count_b;
  for (const LabeledPoint& p : a.points) count_a[p.label] += 1;
  for (const LabeledPoint& p : b.points) count_b[p.label] += 1;

  // overlap dictionary o_{a,b}, keyed by (label in a, label in b)
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> overlap;
  for (const auto& [ia, ib] : pairs)
    overlap[{a.points[ia].label, b.points[ib].label}] += 1;

  PairCompareResult result;
  UnionFind merged_labels;
  for (const auto& [key, o] : overlap) {
    const auto [la, lb] = key;
    const std::size_t smaller = std::min(count_a[la], count_b[lb]);
    const bool by_half = 2 * o > smaller;
    const bool by_floor = static_cast<long long>(o) > tau_n;
    if (!by_half && !by_floor) continue;
    const MergeRule rule = by_half && by_floor ? MergeRule::both
                           : by_half           ? MergeRule::half
                                               : MergeRule::tau_n;
    result.events.push_back({la, lb, o, rule});
    merged_labels.unite(la, lb);
  }

  result.merged.points.reserve(a.size() + b.size());
  result.merged.points.insert(result.merged.points.end(), a.points.begin(), a.points.end());
  result.merged.points.insert(result.merged.points.end(), b.points.begin(), b.points.end());
  if (!result.events.empty())
    for (LabeledPoint& p : result.merged.points) p.label = merged_labels.find(p.label);
  return result;
}

GroupResult disambiguate_group(const MaskGroup& group, const DisambiguationConfig& config) {
  GroupResult result;
  if (group.records.empty()) return result;

  std::vector<const MaskRecord*> order;
  order.reserve(group.records.size());
  for (const MaskRecord& r : group.records) order.push_back(&r);
  if (config.order == MergeOrder::shuffled) {
    std::mt19937_64 rng(config.seed ^ 0x5D1A6F3C9E24B871ull);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (order.size() - i));
      std::swap(order[i], order[j]);
    }
  }

  UnionFind uf;
  std::vector<LabeledPointCloud> clouds;
  clouds.reserve(order.size());
  for (const MaskRecord* r : order) {
    uf.insert(r->mask_index);
    clouds.push_back(r->cloud);
  }

  int round = 0;
  while (clouds.size() > 1) {
    std::vector<LabeledPointCloud> next;
    next.reserve((clouds.size() + 1) / 2);
    for (std::size_t l = 0; l + 1 < clouds.size(); l += 2) {
      PairCompareResult cmp = compare_pair(clouds[l], clouds[l + 1], config.tau_d, config.tau_n);
      for (const PairMergeEvent& e : cmp.events) {
        uf.unite(e.winner, e.absorbed);
        result.events.push_back({round, group.rendered_id, e.winner, e.absorbed, e.matched, e.rule});
      }
      next.push_back(std::move(cmp.merged));
    }
    if (clouds.size() % 2 == 1) next.push_back(std::move(clouds.back()));
    clouds = std::move(next);
    ++round;
  }

  for (auto& [root, members] : uf.blocks()) result.blocks.push_back(std::move(members));
  return result;
}

std::vector<MaskGroup> extract_mask_groups(const std::vector<InstanceMap>& fused,
                                           const std::vector<DepthMap>& depths,
                                           const CameraIntrinsics& intr,
                                           const std::vector<Pose>& poses, double voxel_size,
                                           int workers) {
  if (fused.size() != depths.size() || fused.size() != poses.size())
    throw DimensionError("extract_mask_groups: views, depths and poses must align");

  // heavy per-view work first; ordinals are assigned serially afterwards so
  // the result does not depend on the worker count
  std::vector<std::map<std::int32_t, LabeledPointCloud>> per_view(fused.size());
  parallel_for_index(fused.size(), workers, [&](std::size_t n) {
    const LabeledPointCloud view_cloud = backproject(depths[n], intr, poses[n], fused[n]);
    std::map<std::int32_t, LabeledPointCloud> per_id;
    for (const LabeledPoint& p : view_cloud.points)
      per_id[static_cast<std::int32_t>(p.label)].points.push_back(p);
    // ids present in the map but fully without valid depth still form a mask
    for (const std::int32_t id : fused[n].pixels)
      if (id >= 1) per_id.try_emplace(id);
    for (auto& [id, cloud] : per_id) cloud = voxel_downsample(cloud, voxel_size);
    per_view[n] = std::move(per_id);
  });

  std::map<std::int32_t, MaskGroup> groups;
  std::uint32_t next_ordinal = 1;
  for (std::size_t n = 0; n < per_view.size(); ++n) {
    for (auto& [id, cloud] : per_view[n]) {
      const std::uint32_t ordinal = next_ordinal++;
      for (LabeledPoint& p : cloud.points) {
        p.label = ordinal;
        p.mask_index = ordinal;
      }
      MaskRecord record;
      record.cloud = std::move(cloud);
      record.mask_index = ordinal;
      record.index_set = {{id, static_cast<int>(n)}};
      auto [it, inserted] = groups.try_emplace(id);
      if (inserted) it->second.rendered_id = id;
      it->second.records.push_back(std::move(record));
    }
  }

  std::vector<MaskGroup> out;
  out.reserve(groups.size());
  for (auto& [id, group] : groups) out.push_back(std::move(group));
  return out;
}

std::vector<std::vector<std::int32_t>> block_global_ids(std::span<const MaskPartition> partitions) {
  std::vector<std::vector<std::int32_t>> ids(partitions.size());
  std::int32_t next = 1;
  for (std::size_t g = 0; g < partitions.size(); ++g) {
    ids[g].reserve(partitions[g].size());
    for (std::size_t b = 0; b < partitions[g].size(); ++b) ids[g].push_back(next++);
  }
  return ids;
}

std::vector<InstanceMap> correct_maps(std::span<const MaskGroup> groups,
                                      std::span<const MaskPartition> partitions,
                                      const std::vector<InstanceMap>& fused) {
  if (groups.size() != partitions.size())
    throw DimensionError("correct_maps: one partition per group required");

  // ordinal -> record lookup
  std::map<std::uint32_t, const MaskRecord*> record_of;
  for (const MaskGroup& g : groups)
    for (const MaskRecord& r : g.records) record_of[r.mask_index] = &r;

  std::vector<std::set<std::int32_t>> present(fused.size());
  for (std::size_t n = 0; n < fused.size(); ++n)
    for (const std::int32_t id : fused[n].pixels)
      if (id >= 1) present[n].insert(id);

  std::vector<std::map<std::int32_t, std::int32_t>> rewrite(fused.size());  // per view: id -> global
  const auto globals = block_global_ids(partitions);
  std::int32_t next_id = 0;
  for (const auto& per_group : globals)
    for (const std::int32_t id : per_group) next_id = std::max(next_id, id);
  ++next_id;

  for (std::size_t g = 0; g < partitions.size(); ++g) {
    for (std::size_t b = 0; b < partitions[g].size(); ++b) {
      for (const std::uint32_t ordinal : partitions[g][b]) {
        auto it = record_of.find(ordinal);
        if (it == record_of.end())
          throw ConsistencyError("correct_maps: partition references unknown mask index");
        for (const auto& [id, view] : it->second->index_set) {
          if (view < 0 || static_cast<std::size_t>(view) >= fused.size())
            throw ConsistencyError("correct_maps: mask index addresses a missing view");
          if (!present[view].count(id))
            throw ConsistencyError("correct_maps: mask index addresses an id absent from its view");
          rewrite[view][id] = globals[g][b];
        }
      }
    }
  }

  std::vector<InstanceMap> corrected;
  corrected.reserve(fused.size());
  for (std::size_t n = 0; n < fused.size(); ++n) {
    InstanceMap out(fused[n].height, fused[n].width, 0);
    std::map<std::int32_t, std::int32_t>& map_n = rewrite[n];
    for (std::size_t i = 0; i < fused[n].size(); ++i) {
      const std::int32_t id = fused[n].pixels[i];
      if (id < 1) continue;
      auto it = map_n.find(id);
      if (it == map_n.end()) it = map_n.emplace(id, next_id++).first;  // unreferenced mask
      out.pixels[i] = it->second;
    }
    corrected.push_back(std::move(out));
  }
  return corrected;
}

std::string format_merge_log(std::span<const MergeEvent> events) {
  std::ostringstream os;
  os << "# round group winner absorbed matched rule\n";
  for (const MergeEvent& e : events)
    os << e.round << ' ' << e.group_id << ' ' << e.winner << ' ' << e.absorbed << ' ' << e.matched
       << ' ' << merge_rule_name(e.rule) << '\n';
  return os.str();
}

}  // namespace cu3d
