#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cu3d/bundle.hpp"
#include "cu3d/disambiguation.hpp"
#include "cu3d/evaluation.hpp"
#include "cu3d/semantics.hpp"

namespace cu3d {

struct PipelineConfig {
  double tau_d = 0.075;
  long tau_n = 50;
  double voxel_size = 0.05;
  int max_instances = 200;  // cap on incoming map ids (the field's slot count)
  MergeOrder order = MergeOrder::timestamp;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

/// Flat ordered key/value report. Values are formatted once so the text and
/// JSON renderings stay byte-stable.
struct Metrics {
  std::vector<std::pair<std::string, std::string>> entries;

  void put(const std::string& key, double value);          // six decimals
  void put_count(const std::string& key, long long value);
  const std::string* find(const std::string& key) const;
  double get(const std::string& key) const;  // throws ConsistencyError if absent

  std::string text() const;
  std::string json() const;
};

struct PipelineResult {
  std::vector<InstanceMap> fused;      // label maps rewritten with rendered ids
  std::vector<InstanceMap> corrected;  // globally unique instance ids
  LabeledPointCloud merged_cloud;      // downsampled masks under final ids
  std::vector<MergeEvent> merge_events;
  VoteMatrix votes;                            // empty when no semantic maps
  std::vector<std::int32_t> instance_classes;  // index = instance id; 0 = unknown
  Metrics metrics;
};

/// Full flow: overlap-fill each view, back-project and downsample per mask,
/// group by rendered id, disambiguate each group, rewrite the maps with
/// globally unique ids, vote classes, and evaluate against ground truth when
/// present. Deterministic for a fixed (scene, config), including across
/// worker counts. When the scene has no rendered maps, ground-truth instance
/// maps stand in for them; if neither exists an InputError is thrown.
PipelineResult run_pipeline(const SceneData& scene, const PipelineConfig& config);

/// Pixel-universe comparison of predicted vs ground-truth instance maps.
struct MapMetrics {
  ApResult ap;
  double ari = 0;
  double nmi = 0;
};
MapMetrics evaluate_maps(std::span<const InstanceMap> pred, std::span<const InstanceMap> gt);

/// Writes corrected_%04d.bin, cloud.ply, merge_log.txt, metrics.txt,
/// metrics.json and votes.txt (when votes exist) into out_dir.
void write_artifacts(const PipelineResult& result, const SceneData& scene,
                     const std::filesystem::path& out_dir);

}  // namespace cu3d
