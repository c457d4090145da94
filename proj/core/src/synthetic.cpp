#include "cu3d/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "cu3d/parallel.hpp"
#include "cu3d/union_find.hpp"

namespace cu3d {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(salt)));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  // fixed 53-bit mapping; avoids distribution implementation differences
  const double x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + x * (hi - lo);
}

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

template <typename T>
void shuffle_vec(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    std::swap(v[i], v[i + static_cast<std::size_t>(below(rng, v.size() - i))]);
}

}  // namespace

void SceneSpec::validate() const {
  intrinsics.validate();
  if (cameras.empty()) throw InputError("scene: at least one camera required");
  for (const Pose& p : cameras) p.validate();
  if ((room_max - room_min).minCoeff() <= 0) throw InputError("scene: room bounds degenerate");
  std::set<std::int32_t> ids;
  for (const SceneObject& o : objects) {
    if (o.instance_id < 1) throw InputError("scene: object instance ids must be >= 1");
    if (o.class_id < 1) throw InputError("scene: object class ids must be >= 1");
    if (!ids.insert(o.instance_id).second) throw InputError("scene: duplicate object instance id");
    if (o.half_extent.minCoeff() <= 0) throw InputError("scene: object extents must be positive");
    const Eigen::Vector3d ext =
        o.shape == SceneObject::Shape::sphere ? Eigen::Vector3d::Constant(o.radius()) : o.half_extent;
    if (((o.center - ext) - room_min).minCoeff() < 0 || (room_max - (o.center + ext)).minCoeff() < 0)
      throw InputError("scene: object extends outside the room");
  }
}

void CorruptionSpec::validate() const {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(alias_rate) || !rate_ok(fragmentation_rate) || !rate_ok(semantic_noise_rate))
    throw InputError("corruption: rates must lie in [0, 1]");
  if (boundary_noise_px < 0) throw InputError("corruption: boundary noise must be >= 0");
}

// ---- scene spec serialization -------------------------------------------

namespace {

nlohmann::json vec3_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec3_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("scene spec: expected 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    SceneSpec spec;
    spec.seed = j.value("seed", 0ull);
    spec.room_min = vec3_from(j.at("room").at("min"));
    spec.room_max = vec3_from(j.at("room").at("max"));
    const auto& ji = j.at("intrinsics");
    spec.intrinsics = {ji.at("fx").get<double>(), ji.at("fy").get<double>(),
                       ji.at("cx").get<double>(), ji.at("cy").get<double>(),
                       ji.at("width").get<int>(),  ji.at("height").get<int>()};
    for (const auto& jo : j.at("objects")) {
      SceneObject o;
      const std::string shape = jo.at("shape").get<std::string>();
      if (shape == "box") {
        o.shape = SceneObject::Shape::box;
        o.half_extent = vec3_from(jo.at("half_extent"));
      } else if (shape == "sphere") {
        o.shape = SceneObject::Shape::sphere;
        o.half_extent = Eigen::Vector3d::Constant(jo.at("radius").get<double>());
      } else {
        throw InputError("scene spec: unknown shape '" + shape + "'");
      }
      o.center = vec3_from(jo.at("center"));
      o.instance_id = jo.at("instance").get<std::int32_t>();
      o.class_id = jo.at("class").get<std::int32_t>();
      spec.objects.push_back(o);
    }
    for (const auto& jc : j.at("cameras")) {
      if (!jc.is_array() || jc.size() != 16)
        throw InputError("scene spec: camera must be 16 row-major numbers");
      Pose p;
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) p.camera_to_world(r, c) = jc[r * 4 + c].get<double>();
      spec.cameras.push_back(p);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed scene spec " + path.string() + ": " + e.what());
  }
}

void save_scene_spec(const SceneSpec& spec, const std::filesystem::path& path) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["room"] = {{"min", vec3_json(spec.room_min)}, {"max", vec3_json(spec.room_max)}};
  j["intrinsics"] = {{"fx", spec.intrinsics.fx},       {"fy", spec.intrinsics.fy},
                     {"cx", spec.intrinsics.cx},       {"cy", spec.intrinsics.cy},
                     {"width", spec.intrinsics.width}, {"height", spec.intrinsics.height}};
  j["objects"] = nlohmann::json::array();
  for (const SceneObject& o : spec.objects) {
    nlohmann::json jo;
    jo["shape"] = o.shape == SceneObject::Shape::box ? "box" : "sphere";
    jo["center"] = vec3_json(o.center);
    if (o.shape == SceneObject::Shape::box)
      jo["half_extent"] = vec3_json(o.half_extent);
    else
      jo["radius"] = o.radius();
    jo["instance"] = o.instance_id;
    jo["class"] = o.class_id;
    j["objects"].push_back(jo);
  }
  j["cameras"] = nlohmann::json::array();
  for (const Pose& p : spec.cameras) {
    nlohmann::json jc = nlohmann::json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) jc.push_back(p.camera_to_world(r, c));
    j["cameras"].push_back(jc);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scene spec: " + path.string());
  out << j.dump(2) << '\n';
}

// ---- analytic rendering ---------------------------------------------------

namespace {

constexpr double kRayEps = 1e-9;

/// Smallest positive ray parameter hitting the object; the parameter is in
/// optical-axis depth units when dir has camera-z component 1.
bool intersect(const SceneObject& obj, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
               double& t_out) {
  if (obj.shape == SceneObject::Shape::sphere) {
    const Eigen::Vector3d oc = origin - obj.center;
    const double a = dir.squaredNorm();
    const double b = 2.0 * dir.dot(oc);
    const double c = oc.squaredNorm() - obj.radius() * obj.radius();
    const double disc = b * b - 4 * a * c;
    if (disc < 0) return false;
    const double sq = std::sqrt(disc);
    const double t1 = (-b - sq) / (2 * a);
    const double t2 = (-b + sq) / (2 * a);
    if (t1 > kRayEps) {
      t_out = t1;
      return true;
    }
    if (t2 > kRayEps) {
      t_out = t2;  // camera inside the sphere
      return true;
    }
    return false;
  }

  const Eigen::Vector3d lo = obj.center - obj.half_extent;
  const Eigen::Vector3d hi = obj.center + obj.half_extent;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(dir[axis]) < 1e-15) {
      if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - origin[axis]) / dir[axis];
    double tb = (hi[axis] - origin[axis]) / dir[axis];
    if (ta > tb) std::swap(ta, tb);
    t_near = std::max(t_near, ta);
    t_far = std::min(t_far, tb);
    if (t_near > t_far) return false;
  }
  if (t_far <= kRayEps) return false;
  t_out = t_near > kRayEps ? t_near : t_far;  // inside the box: take the exit
  return true;
}

}  // namespace

RenderedViews render_views(const SceneSpec& spec, int workers) {
  spec.validate();
  const int w = spec.intrinsics.width, h = spec.intrinsics.height;
  RenderedViews out;
  out.depths.assign(spec.cameras.size(), DepthMap(h, w, 0.0f));
  out.instances.assign(spec.cameras.size(), InstanceMap(h, w, 0));
  out.semantics.assign(spec.cameras.size(), SemanticMap(h, w, 0));

  parallel_for_index(spec.cameras.size(), workers, [&](std::size_t n) {
    const Eigen::Matrix3d rot = spec.cameras[n].camera_to_world.topLeftCorner<3, 3>();
    const Eigen::Vector3d origin = spec.cameras[n].camera_to_world.topRightCorner<3, 1>();
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const Eigen::Vector3d dir_cam((u - spec.intrinsics.cx) / spec.intrinsics.fx,
                                      (v - spec.intrinsics.cy) / spec.intrinsics.fy, 1.0);
        const Eigen::Vector3d dir = rot * dir_cam;
        double best_t = std::numeric_limits<double>::infinity();
        const SceneObject* best = nullptr;
        for (const SceneObject& obj : spec.objects) {
          double t;
          if (intersect(obj, origin, dir, t) && t < best_t) {
            best_t = t;
            best = &obj;
          }
        }
        if (best != nullptr) {
          out.depths[n].at(v, u) = static_cast<float>(best_t);
          out.instances[n].at(v, u) = best->instance_id;
          out.semantics[n].at(v, u) = best->class_id;
        }
      }
    }
  });
  return out;
}

// ---- corruption ------------------------------------------------------------

namespace {

/// Chebyshev-r erosion of a mask against the image border and everything
/// outside the mask.
std::vector<char> erode_mask(const std::vector<char>& mask, int h, int w, int r) {
  std::vector<char> out(mask.size(), 0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (!mask[static_cast<std::size_t>(v) * w + u]) continue;
      bool keep = v - r >= 0 && v + r < h && u - r >= 0 && u + r < w;
      for (int dv = -r; keep && dv <= r; ++dv)
        for (int du = -r; du <= r; ++du)
          if (!mask[static_cast<std::size_t>(v + dv) * w + (u + du)]) {
            keep = false;
            break;
          }
      out[static_cast<std::size_t>(v) * w + u] = keep;
    }
  return out;
}

std::vector<char> dilate_mask(const std::vector<char>& mask, int h, int w, int r) {
  std::vector<char> out = mask;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      if (mask[static_cast<std::size_t>(v) * w + u]) continue;
      bool near = false;
      for (int dv = -r; !near && dv <= r; ++dv) {
        if (v + dv < 0 || v + dv >= h) continue;
        for (int du = -r; du <= r; ++du) {
          if (u + du < 0 || u + du >= w) continue;
          if (mask[static_cast<std::size_t>(v + dv) * w + (u + du)]) {
            near = true;
            break;
          }
        }
      }
      out[static_cast<std::size_t>(v) * w + u] = mask[static_cast<std::size_t>(v) * w + u] || near;
    }
  return out;
}

}  // namespace

CorruptedScene corrupt(const RenderedViews& gt, const CorruptionSpec& corruption,
                       std::uint64_t seed) {
  corruption.validate();
  const std::size_t num_views = gt.instances.size();
  if (gt.semantics.size() != num_views && !gt.semantics.empty())
    throw DimensionError("corrupt: semantic view count differs from instance view count");

  std::int32_t max_id = 0;
  for (const InstanceMap& m : gt.instances) max_id = std::max(max_id, max_value(m));

  // visibility per ground-truth object
  std::vector<std::vector<char>> visible(max_id + 1, std::vector<char>(num_views, 0));
  for (std::size_t n = 0; n < num_views; ++n)
    for (const std::int32_t id : gt.instances[n].pixels)
      if (id >= 1) visible[id][n] = 1;

  std::vector<std::int32_t> present_ids;
  for (std::int32_t id = 1; id <= max_id; ++id)
    if (std::find(visible[id].begin(), visible[id].end(), 1) != visible[id].end())
      present_ids.push_back(id);

  auto covisible = [&](std::int32_t a, std::int32_t b) {
    for (std::size_t n = 0; n < num_views; ++n)
      if (visible[a][n] && visible[b][n]) return true;
    return false;
  };

  CorruptedScene out;
  out.rendered_id_of_gt.assign(max_id + 1, 0);
  for (std::int32_t id = 0; id <= max_id; ++id) out.rendered_id_of_gt[id] = id;

  // aliasing: movers adopt the rendered id of a partner they never share a
  // view with, so the pipeline can still separate them in 3D
  std::mt19937_64 scene_rng = stream(seed, 0xA11A5);
  const std::size_t num_movers =
      static_cast<std::size_t>(std::llround(corruption.alias_rate * present_ids.size()));
  std::vector<std::int32_t> shuffled = present_ids;
  shuffle_vec(shuffled, scene_rng);
  std::set<std::int32_t> used;
  std::size_t movers_done = 0;
  for (const std::int32_t mover : shuffled) {
    if (movers_done >= num_movers) break;
    if (used.count(mover)) continue;
    for (const std::int32_t target : shuffled) {
      if (target == mover || used.count(target) || covisible(mover, target)) continue;
      out.rendered_id_of_gt[mover] = target;
      used.insert(mover);
      used.insert(target);
      ++movers_done;
      break;
    }
  }

  // fragmentation set (label maps only)
  std::mt19937_64 frag_rng = stream(seed, 0xF2A6);
  const std::size_t num_frag =
      static_cast<std::size_t>(std::llround(corruption.fragmentation_rate * present_ids.size()));
  std::vector<std::int32_t> frag_candidates = present_ids;
  shuffle_vec(frag_candidates, frag_rng);
  std::set<std::int32_t> frag_set(frag_candidates.begin(),
                                  frag_candidates.begin() +
                                      std::min(num_frag, frag_candidates.size()));

  const int h = num_views ? gt.instances[0].height : 0;
  const int w = num_views ? gt.instances[0].width : 0;
  out.rendered.assign(num_views, InstanceMap(h, w, 0));
  out.labels.assign(num_views, InstanceMap(h, w, 0));
  if (!gt.semantics.empty()) out.semantics.assign(num_views, SemanticMap(h, w, 0));

  std::int32_t num_classes = 0;
  for (const SemanticMap& m : gt.semantics) num_classes = std::max(num_classes, max_value(m));

  for (std::size_t n = 0; n < num_views; ++n) {
    const InstanceMap& gtm = gt.instances[n];
    if (gtm.height != h || gtm.width != w)
      throw DimensionError("corrupt: views must share one image size");

    // --- rendered map: aliased ids, optional boundary noise -----------------
    std::mt19937_64 rng_r = stream(seed, 0x2000 + n);
    if (corruption.boundary_noise_px == 0) {
      for (std::size_t i = 0; i < gtm.size(); ++i) {
        const std::int32_t id = gtm.pixels[i];
        if (id >= 1) out.rendered[n].pixels[i] = out.rendered_id_of_gt[id];
      }
    } else {
      std::vector<std::pair<std::int32_t, std::vector<char>>> rings;  // dilation, id order
      for (const std::int32_t id : present_ids) {
        if (!visible[id][n]) continue;
        std::vector<char> mask(gtm.size(), 0);
        for (std::size_t i = 0; i < gtm.size(); ++i) mask[i] = gtm.pixels[i] == id;
        const bool erode = below(rng_r, 2) == 0;
        const int radius = 1 + static_cast<int>(below(rng_r, corruption.boundary_noise_px));
        if (erode) {
          const std::vector<char> kept = erode_mask(mask, h, w, radius);
          for (std::size_t i = 0; i < kept.size(); ++i)
            if (kept[i]) out.rendered[n].pixels[i] = out.rendered_id_of_gt[id];
        } else {
          for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) out.rendered[n].pixels[i] = out.rendered_id_of_gt[id];
          rings.emplace_back(id, dilate_mask(mask, h, w, radius));
        }
      }
      for (const auto& [id, grown] : rings)
        for (std::size_t i = 0; i < grown.size(); ++i)
          if (grown[i] && out.rendered[n].pixels[i] == 0 && gtm.pixels[i] == 0)
            out.rendered[n].pixels[i] = out.rendered_id_of_gt[id];
    }

    // --- label map: exact boundaries, fragmentation, per-view ids -----------
    std::mt19937_64 rng_l = stream(seed, 0x1000 + n);
    std::vector<std::vector<std::size_t>> masks;  // pixel lists
    for (const std::int32_t id : present_ids) {
      if (!visible[id][n]) continue;
      std::vector<std::size_t> pixels;
      for (std::size_t i = 0; i < gtm.size(); ++i)
        if (gtm.pixels[i] == id) pixels.push_back(i);
      if (frag_set.count(id) && pixels.size() >= 8) {
        int min_col = w, max_col = -1;
        for (const std::size_t i : pixels) {
          const int col = static_cast<int>(i % w);
          min_col = std::min(min_col, col);
          max_col = std::max(max_col, col);
        }
        const int mid = (min_col + max_col) / 2;
        std::vector<std::size_t> left, right;
        for (const std::size_t i : pixels)
          (static_cast<int>(i % w) <= mid ? left : right).push_back(i);
        if (!left.empty() && !right.empty()) {
          masks.push_back(std::move(left));
          masks.push_back(std::move(right));
          continue;
        }
      }
      masks.push_back(std::move(pixels));
    }
    std::vector<std::int32_t> ids(masks.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::int32_t>(i + 1);
    shuffle_vec(ids, rng_l);
    for (std::size_t m = 0; m < masks.size(); ++m)
      for (const std::size_t i : masks[m]) out.labels[n].pixels[i] = ids[m];

    // --- semantic map: per-view class flips ---------------------------------
    if (!gt.semantics.empty()) {
      std::mt19937_64 rng_s = stream(seed, 0x3000 + n);
      out.semantics[n] = gt.semantics[n];
      if (corruption.semantic_noise_rate > 0 && num_classes > 1) {
        for (const std::int32_t id : present_ids) {
          if (!visible[id][n]) continue;
          if (uniform(rng_s, 0.0, 1.0) >= corruption.semantic_noise_rate) continue;
          std::int32_t true_class = 0;
          for (std::size_t i = 0; i < gtm.size(); ++i)
            if (gtm.pixels[i] == id) {
              true_class = gt.semantics[n].pixels[i];
              break;
            }
          if (true_class < 1) continue;
          // uniform over [1, C] \ {true_class}
          std::int32_t wrong = 1 + static_cast<std::int32_t>(below(rng_s, num_classes - 1));
          if (wrong >= true_class) ++wrong;
          for (std::size_t i = 0; i < gtm.size(); ++i)
            if (gtm.pixels[i] == id) out.semantics[n].pixels[i] = wrong;
        }
      }
    }
  }
  return out;
}

// ---- oracle ---------------------------------------------------------------

MaskPartition brute_force_disambiguate(const MaskGroup& group, double tau_d, long tau_n) {
  UnionFind uf;
  for (const MaskRecord& r : group.records) uf.insert(r.mask_index);
  for (std::size_t i = 0; i < group.records.size(); ++i) {
    for (std::size_t j = i + 1; j < group.records.size(); ++j) {
      const PairCompareResult res =
          compare_pair(group.records[i].cloud, group.records[j].cloud, tau_d, tau_n);
      for (const PairMergeEvent& e : res.events) uf.unite(e.winner, e.absorbed);
    }
  }
  MaskPartition blocks;
  for (auto& [root, members] : uf.blocks()) blocks.push_back(std::move(members));
  return blocks;
}

// ---- procedural scene -------------------------------------------------------

SceneSpec make_ring_scene(int num_objects, int num_views, int width, int height,
                          std::uint64_t seed, int num_classes) {
  if (num_objects < 1 || num_views < 1) throw InputError("ring scene: need objects and views");
  if (num_classes < 1) throw InputError("ring scene: need at least one class");

  SceneSpec spec;
  spec.seed = seed;
  spec.room_min = {-4.5, -4.5, 0.0};
  spec.room_max = {4.5, 4.5, 3.0};
  const double hfov_half = 30.0 * M_PI / 180.0;
  const double fx = (width - 1) / (2.0 * std::tan(hfov_half));
  spec.intrinsics = {fx, fx, (width - 1) / 2.0, (height - 1) / 2.0, width, height};

  std::mt19937_64 rng = stream(seed, 0x5C3E);
  const double ring_radius = 3.0;
  for (int i = 0; i < num_objects; ++i) {
    SceneObject o;
    const double angle = 2.0 * M_PI * i / num_objects + uniform(rng, -0.04, 0.04);
    const double radial = ring_radius + uniform(rng, -0.15, 0.15);
    o.center = {radial * std::cos(angle), radial * std::sin(angle), uniform(rng, 0.75, 1.15)};
    o.instance_id = i + 1;
    o.class_id = 1 + static_cast<std::int32_t>(below(rng, num_classes));
    if (below(rng, 2) == 0) {
      o.shape = SceneObject::Shape::sphere;
      o.half_extent = Eigen::Vector3d::Constant(uniform(rng, 0.22, 0.32));
    } else {
      o.shape = SceneObject::Shape::box;
      o.half_extent = {uniform(rng, 0.18, 0.30), uniform(rng, 0.18, 0.30),
                       uniform(rng, 0.18, 0.30)};
    }
    spec.objects.push_back(o);
  }

  for (int k = 0; k < num_views; ++k) {
    const double phi = 2.0 * M_PI * k / num_views;
    const Eigen::Vector3d eye(0.8 * std::cos(phi), 0.8 * std::sin(phi), 1.25);
    const Eigen::Vector3d target(ring_radius * std::cos(phi), ring_radius * std::sin(phi), 0.95);
    const Eigen::Vector3d fwd = (target - eye).normalized();
    const Eigen::Vector3d up(0, 0, 1);
    const Eigen::Vector3d x = up.cross(fwd).normalized();
    const Eigen::Vector3d y = fwd.cross(x);
    Pose pose;
    pose.camera_to_world.topLeftCorner<3, 3>() << x, y, fwd;
    pose.camera_to_world.topRightCorner<3, 1>() = eye;
    spec.cameras.push_back(pose);
  }
  return spec;
}

}  // namespace cu3d
