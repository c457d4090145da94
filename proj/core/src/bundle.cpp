#include "cu3d/bundle.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cu3d {

namespace {

constexpr char kMagic[4] = {'C', 'U', '3', 'D'};
constexpr std::uint32_t kVersion = 1;

std::string view_file(const char* stem, std::size_t n, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04zu.%s", stem, n, ext);
  return buf;
}

struct Header {
  std::uint32_t height = 0, width = 0;
};

void write_header(std::ofstream& out, std::uint32_t h, std::uint32_t w) {
  out.write(kMagic, 4);
  const std::uint32_t fields[3] = {kVersion, h, w};
  out.write(reinterpret_cast<const char*>(fields), sizeof(fields));
}

Header read_header(std::ifstream& in, const std::filesystem::path& path) {
  char magic[4];
  std::uint32_t fields[3];
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(fields), sizeof(fields));
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("bad magic in " + path.string());
  if (fields[0] != kVersion)
    throw IoError("unsupported version " + std::to_string(fields[0]) + " in " + path.string());
  return {fields[1], fields[2]};
}

std::ifstream open_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_payload_consumed(std::ifstream& in, const std::filesystem::path& path) {
  if (!in) throw IoError("truncated payload in " + path.string());
  in.peek();
  if (!in.eof()) throw IoError("trailing bytes in " + path.string());
}

}  // namespace

DepthMap read_depth_file(const std::filesystem::path& path) {
  std::ifstream in = open_read(path);
  const Header hdr = read_header(in, path);
  DepthMap map(static_cast<int>(hdr.height), static_cast<int>(hdr.width), 0.0f);
  in.read(reinterpret_cast<char*>(map.pixels.data()),
          static_cast<std::streamsize>(map.size() * sizeof(float)));
  check_payload_consumed(in, path);
  for (const float v : map.pixels)
    if (!std::isfinite(v) || v < 0)
      throw IoError("non-finite or negative depth in " + path.string());
  return map;
}

void write_depth_file(const DepthMap& map, const std::filesystem::path& path) {
  std::ofstream out = open_write(path);
  write_header(out, map.height, map.width);
  out.write(reinterpret_cast<const char*>(map.pixels.data()),
            static_cast<std::streamsize>(map.size() * sizeof(float)));
  if (!out) throw IoError("write failed for " + path.string());
}

InstanceMap read_id_map_file(const std::filesystem::path& path) {
  std::ifstream in = open_read(path);
  const Header hdr = read_header(in, path);
  std::vector<std::uint16_t> raw(static_cast<std::size_t>(hdr.height) * hdr.width);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(std::uint16_t)));
  check_payload_consumed(in, path);
  InstanceMap map(static_cast<int>(hdr.height), static_cast<int>(hdr.width), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) map.pixels[i] = raw[i];
  return map;
}

void write_id_map_file(const InstanceMap& map, const std::filesystem::path& path) {
  std::vector<std::uint16_t> raw(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const std::int32_t v = map.pixels[i];
    if (v < 0 || v > 0xFFFF)
      throw IoError("id " + std::to_string(v) + " does not fit u16 for " + path.string());
    raw[i] = static_cast<std::uint16_t>(v);
  }
  std::ofstream out = open_write(path);
  write_header(out, map.height, map.width);
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * sizeof(std::uint16_t)));
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

Pose read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Pose pose;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!(in >> pose.camera_to_world(r, c)))
        throw IoError("malformed pose matrix in " + path.string());
  return pose;
}

void write_pose_file(const Pose& pose, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out << pose.camera_to_world(r, c) << (c == 3 ? '\n' : ' ');
  }
}

}  // namespace

SceneData load_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("bundle directory not found: " + dir.string());

  SceneData data;
  {
    const auto path = dir / "intrinsics.txt";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    if (!(in >> data.intrinsics.fx >> data.intrinsics.fy >> data.intrinsics.cx >>
          data.intrinsics.cy >> data.intrinsics.width >> data.intrinsics.height))
      throw IoError("malformed intrinsics in " + path.string());
  }

  // contiguous numbering from 0: count depth files, then demand completeness
  std::size_t num_views = 0;
  while (std::filesystem::exists(dir / view_file("depth", num_views, "bin"))) ++num_views;
  if (num_views == 0) throw IoError("no depth_0000.bin in " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("depth_", 0) == 0 && name.size() == 14) {
      const std::size_t n = std::stoul(name.substr(6, 4));
      if (n >= num_views)
        throw IoError("non-contiguous view numbering: unexpected " + entry.path().string());
    }
  }

  const bool has_rendered = std::filesystem::exists(dir / view_file("rendered", 0, "bin"));
  const bool has_semantic = std::filesystem::exists(dir / view_file("semantic", 0, "bin"));
  const bool has_gt = std::filesystem::exists(dir / view_file("gt_instance", 0, "bin"));

  for (std::size_t n = 0; n < num_views; ++n) {
    data.poses.push_back(read_pose_file(dir / view_file("pose", n, "txt")));
    data.depths.push_back(read_depth_file(dir / view_file("depth", n, "bin")));
    data.labels.push_back(read_id_map_file(dir / view_file("instance", n, "bin")));
    if (has_rendered) data.rendered.push_back(read_id_map_file(dir / view_file("rendered", n, "bin")));
    if (has_semantic) data.semantics.push_back(read_id_map_file(dir / view_file("semantic", n, "bin")));
    if (has_gt) data.gt_instances.push_back(read_id_map_file(dir / view_file("gt_instance", n, "bin")));
  }

  const int h = data.intrinsics.height, w = data.intrinsics.width;
  auto check_shape = [&](int mh, int mw, const char* what, std::size_t n) {
    if (mh != h || mw != w)
      throw IoError(std::string(what) + " " + view_file(what, n, "bin") + " in " + dir.string() +
                    " does not match intrinsics size");
  };
  for (std::size_t n = 0; n < num_views; ++n) {
    check_shape(data.depths[n].height, data.depths[n].width, "depth", n);
    check_shape(data.labels[n].height, data.labels[n].width, "instance", n);
    if (has_rendered) check_shape(data.rendered[n].height, data.rendered[n].width, "rendered", n);
    if (has_semantic) check_shape(data.semantics[n].height, data.semantics[n].width, "semantic", n);
    if (has_gt)
      check_shape(data.gt_instances[n].height, data.gt_instances[n].width, "gt_instance", n);
  }

  const auto classes_path = dir / "classes.txt";
  if (std::filesystem::exists(classes_path)) {
    std::ifstream in(classes_path);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
      data.class_names.push_back(line);
    }
  }
  return data;
}

void save_bundle(const SceneData& data, const std::filesystem::path& dir) {
  const std::size_t n_views = data.num_views();
  if (data.poses.size() != n_views || data.labels.size() != n_views)
    throw DimensionError("save_bundle: poses, depths and instance maps must align");
  std::filesystem::create_directories(dir);

  {
    std::ofstream out(dir / "intrinsics.txt");
    if (!out) throw IoError("cannot write " + (dir / "intrinsics.txt").string());
    out.precision(17);
    out << data.intrinsics.fx << ' ' << data.intrinsics.fy << ' ' << data.intrinsics.cx << ' '
        << data.intrinsics.cy << ' ' << data.intrinsics.width << ' ' << data.intrinsics.height
        << '\n';
  }

  for (std::size_t n = 0; n < n_views; ++n) {
    write_pose_file(data.poses[n], dir / view_file("pose", n, "txt"));
    write_depth_file(data.depths[n], dir / view_file("depth", n, "bin"));
    write_id_map_file(data.labels[n], dir / view_file("instance", n, "bin"));
    if (!data.rendered.empty())
      write_id_map_file(data.rendered[n], dir / view_file("rendered", n, "bin"));
    if (!data.semantics.empty())
      write_id_map_file(data.semantics[n], dir / view_file("semantic", n, "bin"));
    if (!data.gt_instances.empty())
      write_id_map_file(data.gt_instances[n], dir / view_file("gt_instance", n, "bin"));
  }

  if (!data.class_names.empty()) {
    std::ofstream out(dir / "classes.txt");
    if (!out) throw IoError("cannot write " + (dir / "classes.txt").string());
    for (const std::string& name : data.class_names) out << name << '\n';
  }
}

}  // namespace cu3d
