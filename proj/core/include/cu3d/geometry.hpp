#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "cu3d/image.hpp"

namespace cu3d {

/// Pinhole camera, pixel units.
struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Throws InputError unless fx,fy > 0 and the principal point is inside the image.
  void validate() const;
};

/// Camera-to-world rigid transform, meters.
struct Pose {
  Eigen::Matrix4d camera_to_world = Eigen::Matrix4d::Identity();

  /// Rotation block orthonormal with det +1, last row (0,0,0,1), within tol.
  bool is_valid(double tol = 1e-6) const;
  void validate(double tol = 1e-6) const;

  /// Exact rigid inverse (R^T | -R^T t).
  Eigen::Matrix4d world_to_camera() const;
};

struct LabeledPoint {
  double x = 0, y = 0, z = 0;
  std::uint32_t label = 0;       // instance label, >= 1
  std::uint32_t mask_index = 0;  // ordinal of the source mask
};

/// 3D points carrying an instance label and the index of the mask they came from.
struct LabeledPointCloud {
  std::vector<LabeledPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Lifts every pixel with depth > 0 and instance id > 0 into the world frame.
/// Point order is row-major over the image; mask_index is left at 0 for the
/// caller to stamp. Throws DimensionError on shape mismatch, InputError on
/// non-finite or negative depth.
LabeledPointCloud backproject(const DepthMap& depth, const CameraIntrinsics& intr,
                              const Pose& pose, const InstanceMap& ids);

/// Collapses each occupied voxel to the centroid of its members. The label is
/// the majority label in the voxel (ties go to the smallest label) and the
/// mask_index comes from the first contributing point. Output order is the
/// first-appearance order of voxels, which makes the operation idempotent.
LabeledPointCloud voxel_downsample(const LabeledPointCloud& cloud, double voxel_size);

/// Nearest-neighbor pairs closer than tau_d. Each point of the smaller cloud
/// is matched independently to its nearest neighbor in the other cloud (the
/// larger side may be matched more than once). Pairs carry the index into `a`
/// first regardless of which cloud was smaller. Backed by a uniform voxel hash
/// grid with cell edge tau_d; equals the brute-force scan for all inputs.
std::vector<std::pair<std::uint32_t, std::uint32_t>> radius_match(const LabeledPointCloud& a,
                                                                  const LabeledPointCloud& b,
                                                                  double tau_d);

}  // namespace cu3d
