#pragma once

#include <filesystem>

#include "cu3d/geometry.hpp"

namespace cu3d {

/// ASCII PLY with per-vertex double x/y/z and the instance label as a uint
/// scalar property. Coordinates are printed with 17 significant digits so the
/// file re-parses to identical values.
void export_cloud(const LabeledPointCloud& cloud, const std::filesystem::path& path);

/// Reads files produced by export_cloud (mask_index is not stored and comes
/// back as 0). Throws IoError on any deviation from that layout.
LabeledPointCloud read_cloud(const std::filesystem::path& path);

}  // namespace cu3d
