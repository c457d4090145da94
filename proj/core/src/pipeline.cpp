#include "cu3d/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "cu3d/alignment.hpp"
#include "cu3d/parallel.hpp"
#include "cu3d/ply.hpp"

namespace cu3d {

void PipelineConfig::validate() const {
  if (!(tau_d > 0)) throw InputError("config: tau_d must be positive");
  if (tau_n < 0) throw InputError("config: tau_n must be non-negative");
  if (!(voxel_size > 0)) throw InputError("config: voxel size must be positive");
  if (max_instances < 1) throw InputError("config: max instances must be >= 1");
  if (workers < 1) throw InputError("config: workers must be >= 1");
}

void Metrics::put(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  entries.emplace_back(key, buf);
}

void Metrics::put_count(const std::string& key, long long value) {
  entries.emplace_back(key, std::to_string(value));
}

const std::string* Metrics::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

double Metrics::get(const std::string& key) const {
  const std::string* v = find(key);
  if (v == nullptr) throw ConsistencyError("metrics: missing key " + key);
  return std::stod(*v);
}

std::string Metrics::text() const {
  std::string out;
  for (const auto& [k, v] : entries) {
    out += k;
    out += ' ';
    out += v;
    out += '\n';
  }
  return out;
}

std::string Metrics::json() const {
  std::string out = "{\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out += "  \"" + entries[i].first + "\": " + entries[i].second;
    out += i + 1 < entries.size() ? ",\n" : "\n";
  }
  out += "}\n";
  return out;
}

MapMetrics evaluate_maps(std::span<const InstanceMap> pred, std::span<const InstanceMap> gt) {
  if (pred.size() != gt.size()) throw DimensionError("evaluate_maps: view counts differ");
  const InstancePartition p = partition_from_maps(pred);
  const InstancePartition g = partition_from_maps(gt);
  MapMetrics m;
  m.ap = average_precision(p, g);
  m.ari = ari(p, g);
  m.nmi = nmi(p, g);
  return m;
}

namespace {

/// Majority ground-truth id over a mask's support (ties to the smallest id,
/// 0 when the mask covers no labeled ground truth).
std::int32_t majority_gt_id(const InstanceMap& fused, const InstanceMap& gt, std::int32_t mask_id) {
  std::map<std::int32_t, std::size_t> counts;
  for (std::size_t i = 0; i < fused.size(); ++i)
    if (fused.pixels[i] == mask_id && gt.pixels[i] >= 1) counts[gt.pixels[i]] += 1;
  std::int32_t best = 0;
  std::size_t best_count = 0;
  for (const auto& [id, c] : counts)
    if (c > best_count) {
      best_count = c;
      best = id;
    }
  return best;
}

}  // namespace

PipelineResult run_pipeline(const SceneData& scene, const PipelineConfig& config) {
  config.validate();
  scene.intrinsics.validate();
  const std::size_t num_views = scene.num_views();
  if (num_views == 0) throw InputError("pipeline: scene has no views");
  if (scene.poses.size() != num_views || scene.labels.size() != num_views)
    throw DimensionError("pipeline: poses, depths and instance maps must align");

  const std::vector<InstanceMap>* rendered = nullptr;
  if (!scene.rendered.empty()) {
    rendered = &scene.rendered;
  } else if (!scene.gt_instances.empty()) {
    rendered = &scene.gt_instances;  // clean stand-in for a consistent field
  } else {
    throw InputError("pipeline: no rendered maps and no ground truth to derive them from");
  }
  if (rendered->size() != num_views)
    throw DimensionError("pipeline: rendered map count does not match views");

  std::int32_t max_rendered_id = 0;
  for (const InstanceMap& m : *rendered) max_rendered_id = std::max(max_rendered_id, max_value(m));
  std::int32_t max_label_id = 0;
  for (const InstanceMap& m : scene.labels) max_label_id = std::max(max_label_id, max_value(m));
  if (max_rendered_id > config.max_instances || max_label_id > config.max_instances)
    throw InputError("pipeline: map ids exceed the configured max instances");

  PipelineResult result;

  // fuse: crisp label masks adopt the consistent rendered ids
  std::int32_t next_fresh = max_rendered_id + 1;
  result.fused.reserve(num_views);
  for (std::size_t n = 0; n < num_views; ++n)
    result.fused.push_back(overlap_fill(scene.labels[n], (*rendered)[n], next_fresh));

  // per-mask 3D extraction and per-group disambiguation
  const std::vector<MaskGroup> groups = extract_mask_groups(
      result.fused, scene.depths, scene.intrinsics, scene.poses, config.voxel_size, config.workers);

  DisambiguationConfig dconfig{config.tau_d, config.tau_n, config.order, config.seed};
  std::vector<GroupResult> group_results(groups.size());
  parallel_for_index(groups.size(), config.workers,
                     [&](std::size_t g) { group_results[g] = disambiguate_group(groups[g], dconfig); });

  std::vector<MaskPartition> partitions;
  partitions.reserve(groups.size());
  for (GroupResult& gr : group_results) {
    partitions.push_back(gr.blocks);
    result.merge_events.insert(result.merge_events.end(), gr.events.begin(), gr.events.end());
  }

  result.corrected = correct_maps(groups, partitions, result.fused);

  // merged cloud under final global ids
  const auto globals = block_global_ids(partitions);
  std::map<std::uint32_t, std::int32_t> global_of_ordinal;
  for (std::size_t g = 0; g < partitions.size(); ++g)
    for (std::size_t b = 0; b < partitions[g].size(); ++b)
      for (const std::uint32_t ordinal : partitions[g][b]) global_of_ordinal[ordinal] = globals[g][b];
  std::size_t total_masks = 0, total_points = 0;
  for (const MaskGroup& g : groups) {
    total_masks += g.records.size();
    for (const MaskRecord& r : g.records) total_points += r.cloud.size();
  }
  result.merged_cloud.points.reserve(total_points);
  for (const MaskGroup& g : groups)
    for (const MaskRecord& r : g.records) {
      const std::int32_t gid = global_of_ordinal.at(r.mask_index);
      for (LabeledPoint p : r.cloud.points) {
        p.label = static_cast<std::uint32_t>(gid);
        result.merged_cloud.points.push_back(p);
      }
    }

  // semantic voting
  std::int32_t max_global_id = 0;
  for (const InstanceMap& m : result.corrected) max_global_id = std::max(max_global_id, max_value(m));
  if (!scene.semantics.empty()) {
    if (scene.semantics.size() != num_views)
      throw DimensionError("pipeline: semantic map count does not match views");
    std::int32_t num_classes = static_cast<std::int32_t>(scene.class_names.size());
    for (const SemanticMap& m : scene.semantics) num_classes = std::max(num_classes, max_value(m));
    std::vector<VoteMatrix> per_view(num_views);
    parallel_for_index(num_views, config.workers, [&](std::size_t n) {
      per_view[n] = vote_single_view(result.corrected[n], scene.semantics[n], max_global_id,
                                     num_classes);
    });
    result.votes = aggregate_votes(per_view);
    result.instance_classes = assign_classes(result.votes);
  }

  // report
  Metrics& m = result.metrics;
  m.put_count("views", static_cast<long long>(num_views));
  m.put_count("masks", static_cast<long long>(total_masks));
  m.put_count("groups", static_cast<long long>(groups.size()));
  std::size_t total_blocks = 0;
  for (const MaskPartition& p : partitions) total_blocks += p.size();
  m.put_count("objects", static_cast<long long>(total_blocks));
  m.put_count("merge_events", static_cast<long long>(result.merge_events.size()));
  m.put_count("cloud_points", static_cast<long long>(result.merged_cloud.size()));

  if (!scene.gt_instances.empty()) {
    if (scene.gt_instances.size() != num_views)
      throw DimensionError("pipeline: ground-truth map count does not match views");
    const MapMetrics before = evaluate_maps(result.fused, scene.gt_instances);
    const MapMetrics after = evaluate_maps(result.corrected, scene.gt_instances);
    m.put("ap_before", before.ap.ap);
    m.put("ap50_before", before.ap.ap50);
    m.put("ap25_before", before.ap.ap25);
    m.put("ap", after.ap.ap);
    m.put("ap50", after.ap.ap50);
    m.put("ap25", after.ap.ap25);
    m.put("ari_pixel_before", before.ari);
    m.put("ari_pixel", after.ari);
    m.put("nmi_pixel_before", before.nmi);
    m.put("nmi_pixel", after.nmi);

    // mask universe: one element per extracted mask
    InstancePartition mask_before, mask_after, mask_gt;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (const MaskRecord& r : groups[g].records) {
        mask_before.labels.push_back(groups[g].rendered_id);
        mask_after.labels.push_back(global_of_ordinal.at(r.mask_index));
        const auto& [id, view] = r.index_set.front();
        mask_gt.labels.push_back(majority_gt_id(result.fused[view], scene.gt_instances[view], id));
      }
    }
    m.put("ari_mask_before", ari(mask_before, mask_gt));
    m.put("ari_mask", ari(mask_after, mask_gt));
    m.put("nmi_mask_before", nmi(mask_before, mask_gt));
    m.put("nmi_mask", nmi(mask_after, mask_gt));

    if (!scene.semantics.empty() && !result.instance_classes.empty()) {
      std::vector<SemanticMap> projected;
      projected.reserve(num_views);
      for (const InstanceMap& ids : result.corrected) {
        SemanticMap sm(ids.height, ids.width, 0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
          const std::int32_t u = ids.pixels[i];
          if (u >= 1 && u < static_cast<std::int32_t>(result.instance_classes.size()))
            sm.pixels[i] = result.instance_classes[u];
        }
        projected.push_back(std::move(sm));
      }
      std::int32_t num_classes = static_cast<std::int32_t>(scene.class_names.size());
      for (const SemanticMap& sm : scene.semantics) num_classes = std::max(num_classes, max_value(sm));
      const auto [miou, macc] = miou_macc(projected, scene.semantics, num_classes);
      m.put("miou", miou);
      m.put("macc", macc);
    }
  }
  return result;
}

void write_artifacts(const PipelineResult& result, const SceneData& scene,
                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  for (std::size_t n = 0; n < result.corrected.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "corrected_%04zu.bin", n);
    write_id_map_file(result.corrected[n], out_dir / name);
  }

  export_cloud(result.merged_cloud, out_dir / "cloud.ply");

  {
    std::ofstream out(out_dir / "merge_log.txt");
    if (!out) throw IoError("cannot write " + (out_dir / "merge_log.txt").string());
    out << format_merge_log(result.merge_events);
  }
  {
    std::ofstream out(out_dir / "metrics.txt");
    if (!out) throw IoError("cannot write " + (out_dir / "metrics.txt").string());
    out << result.metrics.text();
  }
  {
    std::ofstream out(out_dir / "metrics.json");
    if (!out) throw IoError("cannot write " + (out_dir / "metrics.json").string());
    out << result.metrics.json();
  }

  if (result.votes.instances > 0) {
    std::ofstream out(out_dir / "votes.txt");
    if (!out) throw IoError("cannot write " + (out_dir / "votes.txt").string());
    out << "# instance class name votes_per_class\n";
    for (int u = 1; u <= result.votes.instances; ++u) {
      bool any = false;
      for (int c = 1; c <= result.votes.classes; ++c)
        if (result.votes.at(u, c) > 0) any = true;
      if (!any) continue;
      const std::int32_t cls =
          u < static_cast<int>(result.instance_classes.size()) ? result.instance_classes[u] : 0;
      std::string name = "unknown";
      if (cls >= 1 && cls <= static_cast<std::int32_t>(scene.class_names.size()))
        name = scene.class_names[cls - 1];
      out << u << ' ' << cls << ' ' << name;
      for (int c = 1; c <= result.votes.classes; ++c) out << ' ' << result.votes.at(u, c);
      out << '\n';
    }
  }
}

}  // namespace cu3d
