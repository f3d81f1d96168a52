#pragma once

#include <optional>

#include "qd/geom/mesh.hpp"
#include "qd/geom/point_cloud.hpp"
#include "qd/geom/rng.hpp"

namespace qd {

struct CameraIntrinsics {
  int width = 160;
  int height = 120;
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;

  // Square pixels, principal point at the image center.
  static CameraIntrinsics from_fov(int width, int height, double horizontal_fov_deg);
  static CameraIntrinsics default_intrinsics() { return from_fov(160, 120, 60.0); }
  void validate() const;
};

// Moller-Trumbore. Returns the ray parameter of the hit, if any, with t > t_min.
std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& v0, const Vec3& v1,
                                             const Vec3& v2, double t_min = 0.0);

// One ray per pixel center through the pinhole model; the nearest hit is
// kept as a world-frame point. Misses are omitted. The camera pose maps
// camera coordinates (z forward, y down) to world.
PointCloud render_depth(const TriangleMesh& mesh, const Pose& camera, const CameraIntrinsics& intr);

// Area-weighted uniform surface samples; normals are the triangle normals.
// The returned viewpoint is left at the origin.
PointCloud sample_surface(const TriangleMesh& mesh, Rng& rng, std::size_t count);

// Uniform scale so the largest bounding-box extent is drawn uniformly from
// [lo, hi], then translated so the bounding-box center is at the origin.
// `applied_scale` (optional) receives the factor.
TriangleMesh scale_to_extents(const TriangleMesh& mesh, Rng& rng, double lo, double hi,
                              double* applied_scale = nullptr);

}  // namespace qd
