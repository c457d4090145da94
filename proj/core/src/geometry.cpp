#include "cu3d/geometry.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

namespace cu3d {

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw InputError("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InputError("intrinsics: image size must be positive");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
    throw InputError("intrinsics: principal point must lie inside the image");
}

bool Pose::is_valid(double tol) const {
  const Eigen::Matrix3d r = camera_to_world.topLeftCorner<3, 3>();
  if (((r * r.transpose()) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(r.determinant() - 1.0) > tol) return false;
  const Eigen::RowVector4d last = camera_to_world.row(3);
  return (last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() <= tol;
}

void Pose::validate(double tol) const {
  if (!camera_to_world.allFinite()) throw InputError("pose: matrix has non-finite entries");
  if (!is_valid(tol)) throw InputError("pose: rotation block not orthonormal with det +1");
}

Eigen::Matrix4d Pose::world_to_camera() const {
  const Eigen::Matrix3d r = camera_to_world.topLeftCorner<3, 3>();
  const Eigen::Vector3d t = camera_to_world.topRightCorner<3, 1>();
  Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
  inv.topLeftCorner<3, 3>() = r.transpose();
  inv.topRightCorner<3, 1>() = -r.transpose() * t;
  return inv;
}

LabeledPointCloud backproject(const DepthMap& depth, const CameraIntrinsics& intr,
                              const Pose& pose, const InstanceMap& ids) {
  intr.validate();
  pose.validate();
  if (depth.height != ids.height || depth.width != ids.width)
    throw DimensionError("backproject: depth and instance map shapes differ");
  if (depth.height != intr.height || depth.width != intr.width)
    throw DimensionError("backproject: depth shape does not match intrinsics");

  const Eigen::Matrix4d& m = pose.camera_to_world;
  LabeledPointCloud cloud;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const float z = depth.at(v, u);
      if (!std::isfinite(z) || z < 0)
        throw InputError("backproject: depth values must be finite and non-negative");
      if (z == 0.0f) continue;
      const std::int32_t id = ids.at(v, u);
      if (id <= 0) continue;
      const double zd = static_cast<double>(z);
      const Eigen::Vector4d cam((u - intr.cx) * zd / intr.fx, (v - intr.cy) * zd / intr.fy, zd, 1.0);
      const Eigen::Vector4d world = m * cam;
      cloud.points.push_back({world.x(), world.y(), world.z(), static_cast<std::uint32_t>(id), 0});
    }
  }
  return cloud;
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full;
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

VoxelKey voxel_of(const LabeledPoint& p, double inv_size) {
  return {static_cast<std::int64_t>(std::floor(p.x * inv_size)),
          static_cast<std::int64_t>(std::floor(p.y * inv_size)),
          static_cast<std::int64_t>(std::floor(p.z * inv_size))};
}

}  // namespace

LabeledPointCloud voxel_downsample(const LabeledPointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0)) throw InputError("voxel_downsample: voxel size must be positive");
  const double inv = 1.0 / voxel_size;

  struct Accum {
    double sx = 0, sy = 0, sz = 0;
    std::size_t count = 0;
    std::uint32_t first_mask_index = 0;
    std::map<std::uint32_t, std::size_t> label_counts;  // ordered: smallest label wins ties
  };

  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot_of;
  std::vector<Accum> accums;  // first-appearance order
  slot_of.reserve(cloud.size());

  for (const LabeledPoint& p : cloud.points) {
    const VoxelKey key = voxel_of(p, inv);
    auto [it, inserted] = slot_of.try_emplace(key, accums.size());
    if (inserted) {
      accums.emplace_back();
      accums.back().first_mask_index = p.mask_index;
    }
    Accum& a = accums[it->second];
    a.sx += p.x;
    a.sy += p.y;
    a.sz += p.z;
    a.count += 1;
    a.label_counts[p.label] += 1;
  }

  LabeledPointCloud out;
  out.points.reserve(accums.size());
  for (const Accum& a : accums) {
    std::uint32_t best_label = 0;
    std::size_t best_count = 0;
    for (const auto& [label, count] : a.label_counts) {
      if (count > best_count) {
        best_count = count;
        best_label = label;
      }
    }
    const double n = static_cast<double>(a.count);
    out.points.push_back({a.sx / n, a.sy / n, a.sz / n, best_label, a.first_mask_index});
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> radius_match(const LabeledPointCloud& a,
                                                                  const LabeledPointCloud& b,
                                                                  double tau_d) {
  if (!(tau_d > 0)) throw InputError("radius_match: tau_d must be positive");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (a.empty() || b.empty()) return pairs;

  // Iterate the smaller cloud; its size bounds the half-overlap denominator.
  const bool a_is_query = a.size() <= b.size();
  const LabeledPointCloud& query = a_is_query ? a : b;
  const LabeledPointCloud& data = a_is_query ? b : a;

  const double inv = 1.0 / tau_d;
  std::unordered_map<VoxelKey, std::vector<std::uint32_t>, VoxelKeyHash> grid;
  grid.reserve(data.size());
  for (std::uint32_t j = 0; j < data.size(); ++j)
    grid[voxel_of(data.points[j], inv)].push_back(j);

  const double tau_sq = tau_d * tau_d;
  pairs.reserve(query.size());
  for (std::uint32_t i = 0; i < query.size(); ++i) {
    const LabeledPoint& p = query.points[i];
    const VoxelKey c = voxel_of(p, inv);
    double best_sq = std::numeric_limits<double>::infinity();
    std::uint32_t best_j = 0;
    bool found = false;
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (std::uint32_t j : it->second) {
            const LabeledPoint& q = data.points[j];
            const double ddx = p.x - q.x, ddy = p.y - q.y, ddz = p.z - q.z;
            const double d_sq = ddx * ddx + ddy * ddy + ddz * ddz;
            if (d_sq < best_sq || (d_sq == best_sq && found && j < best_j)) {
              best_sq = d_sq;
              best_j = j;
              found = true;
            }
          }
        }
    if (found && best_sq < tau_sq) {
      if (a_is_query)
        pairs.emplace_back(i, best_j);
      else
        pairs.emplace_back(best_j, i);
    }
  }
  return pairs;
}

}  // namespace cu3d
