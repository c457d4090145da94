#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cu3d/disambiguation.hpp"
#include "cu3d/geometry.hpp"
#include "cu3d/image.hpp"

namespace cu3d {

struct SceneObject {
  enum class Shape { box, sphere };
  Shape shape = Shape::box;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d half_extent = Eigen::Vector3d::Zero();  // sphere: radius in x
  std::int32_t instance_id = 0;
  std::int32_t class_id = 0;

  double radius() const { return half_extent.x(); }
};

/// Analytic desk-scale scene: room bounds, solid objects, camera trajectory.
struct SceneSpec {
  Eigen::Vector3d room_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d room_max = Eigen::Vector3d::Zero();
  std::vector<SceneObject> objects;
  std::vector<Pose> cameras;
  CameraIntrinsics intrinsics;
  std::uint64_t seed = 0;

  /// Objects inside the room with positive extents, at least one camera.
  void validate() const;
};

SceneSpec load_scene_spec(const std::filesystem::path& path);
void save_scene_spec(const SceneSpec& spec, const std::filesystem::path& path);

/// Knobs emulating an inconsistent instance field: aliasing makes ground-truth
/// objects share a rendered id (consistently across views), fragmentation
/// splits an object's per-view mask across two label ids, boundary noise
/// dilates/erodes rendered masks, semantic noise flips per-view class labels.
struct CorruptionSpec {
  double alias_rate = 0.0;
  double fragmentation_rate = 0.0;
  int boundary_noise_px = 0;
  double semantic_noise_rate = 0.0;

  void validate() const;
};

struct RenderedViews {
  std::vector<DepthMap> depths;
  std::vector<InstanceMap> instances;  // ground-truth ids
  std::vector<SemanticMap> semantics;  // ground-truth classes
};

/// Per-pixel ray casting against the scene's boxes and spheres; the nearest
/// positive hit wins and depth is the hit distance along the optical axis.
/// Deterministic: bit-identical across re-runs and worker counts.
RenderedViews render_views(const SceneSpec& spec, int workers = 1);

struct CorruptedScene {
  std::vector<InstanceMap> rendered;  // consistent ids, aliased, noisy boundaries
  std::vector<InstanceMap> labels;    // exact boundaries, per-view ids, fragmented
  std::vector<SemanticMap> semantics; // per-view class maps with optional noise
  std::vector<std::int32_t> rendered_id_of_gt;  // index = gt id; [0] unused
};

/// Derives the complementary map pair from ground truth: rendered maps hold
/// ids consistent across views but aliased/noisy, label maps hold exact
/// boundaries but per-view randomized ids. Aliased partners are chosen among
/// object pairs that never share a view, so they stay separable in 3D.
CorruptedScene corrupt(const RenderedViews& gt, const CorruptionSpec& corruption,
                       std::uint64_t seed);

/// Oracle for the hierarchical disambiguation: compares ALL unordered mask
/// pairs independently (no unions carried over) and returns the transitive
/// closure of the positive decisions.
MaskPartition brute_force_disambiguate(const MaskGroup& group, double tau_d, long tau_n);

/// Procedural scene: objects spread on a ring around the room center, cameras
/// on an inner ring looking outward so each view covers one sector.
SceneSpec make_ring_scene(int num_objects, int num_views, int width, int height,
                          std::uint64_t seed, int num_classes = 8);

}  // namespace cu3d
