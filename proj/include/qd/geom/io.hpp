#pragma once

#include <filesystem>
#include <string>

#include "qd/geom/mesh.hpp"
#include "qd/geom/point_cloud.hpp"

namespace qd {

// ASCII PLY: a `vertex` element with x y z and optionally nx ny nz. The
// viewpoint travels in a `comment viewpoint x y z` header line.
// Values are written with 17 significant digits so a round trip is lossless.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

// OFF and OBJ (v / f records only; polygons are fan-triangulated).
TriangleMesh read_off(const std::filesystem::path& path);
TriangleMesh read_obj(const std::filesystem::path& path);
void write_off(const std::filesystem::path& path, const TriangleMesh& mesh);
// Dispatches on the file extension (.off / .obj).
TriangleMesh read_mesh(const std::filesystem::path& path);

// printf("%.*g") wrapper used by every text writer.
std::string format_double(double v, int significant_digits = 17);

}  // namespace qd
