#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cu3d/geometry.hpp"
#include "cu3d/image.hpp"

namespace cu3d {

/// In-memory form of an on-disk scene bundle. A bundle directory holds
/// `intrinsics.txt` (fx fy cx cy width height), per view `pose_%04d.txt`
/// (4x4 row-major) plus flat binary maps with a 16-byte header (magic "CU3D",
/// u32 version = 1, u32 height, u32 width, then row-major little-endian
/// payload): `depth_%04d.bin` (f32 meters) and `instance_%04d.bin` (u16 ids).
/// Optional per view: `rendered_%04d.bin`, `semantic_%04d.bin`,
/// `gt_instance_%04d.bin`. Optional `classes.txt` (one name per line, line
/// number = class id).
struct SceneData {
  CameraIntrinsics intrinsics;
  std::vector<Pose> poses;
  std::vector<DepthMap> depths;
  std::vector<InstanceMap> labels;        // instance_%04d.bin
  std::vector<InstanceMap> rendered;      // optional, empty if absent
  std::vector<SemanticMap> semantics;     // optional
  std::vector<InstanceMap> gt_instances;  // optional
  std::vector<std::string> class_names;   // optional, 1-based via index + 1

  std::size_t num_views() const { return depths.size(); }
};

/// Reads a bundle directory; throws IoError naming the offending file on any
/// missing file, bad magic/version, size mismatch, or non-finite depth.
SceneData load_bundle(const std::filesystem::path& dir);

/// Writes every populated field of the bundle; creates the directory.
void save_bundle(const SceneData& data, const std::filesystem::path& dir);

// Map-file primitives (exposed for tools and tests).
DepthMap read_depth_file(const std::filesystem::path& path);
void write_depth_file(const DepthMap& map, const std::filesystem::path& path);
InstanceMap read_id_map_file(const std::filesystem::path& path);
void write_id_map_file(const InstanceMap& map, const std::filesystem::path& path);

}  // namespace cu3d
