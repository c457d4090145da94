#include "cu3d/ply.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cu3d/errors.hpp"

namespace cu3d {

void export_cloud(const LabeledPointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\n"
      << "format ascii 1.0\n"
      << "comment cu3d labeled point cloud\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\n"
      << "property double y\n"
      << "property double z\n"
      << "property uint instance\n"
      << "end_header\n";
  char line[128];
  for (const LabeledPoint& p : cloud.points) {
    std::snprintf(line, sizeof(line), "%.17g %.17g %.17g %" PRIu32 "\n", p.x, p.y, p.z, p.label);
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

LabeledPointCloud read_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  std::size_t count = 0;
  bool header_done = false;
  std::vector<std::string> expected = {
      "ply",
      "format ascii 1.0",
      "",  // element vertex N, checked separately
      "property double x",
      "property double y",
      "property double z",
      "property uint instance",
      "end_header",
  };
  std::size_t expect_idx = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("comment", 0) == 0) continue;
    if (line.rfind("element vertex ", 0) == 0) {
      count = std::stoull(line.substr(15));
      expect_idx = 3;
      continue;
    }
    if (expect_idx >= expected.size() || line != expected[expect_idx])
      throw IoError("unexpected PLY header line '" + line + "' in " + path.string());
    ++expect_idx;
    if (line == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw IoError("truncated PLY header in " + path.string());

  LabeledPointCloud cloud;
  cloud.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    LabeledPoint p;
    if (!(in >> p.x >> p.y >> p.z >> p.label))
      throw IoError("truncated PLY payload in " + path.string());
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace cu3d
