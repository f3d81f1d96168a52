#pragma once

#include "qd/geom/mesh.hpp"
#include "qd/geom/point_cloud.hpp"
#include "qd/geom/rng.hpp"
#include "qd/synth/render.hpp"

namespace qd {

inline constexpr std::size_t kDefaultDenseSurfaceCount = 20000;

// Ground truth plus one partial observation of it.
struct SceneSample {
  TriangleMesh mesh;         // world frame, already scaled
  Pose camera;               // camera-to-world
  PointCloud cloud;          // rendered partial view; viewpoint = camera origin
  // Exact surface samples with triangle normals. Covers the whole object, so
  // the "normals face the viewpoint" rule of observed clouds does not apply.
  PointCloud dense_surface;
};

SceneSample make_scene(const TriangleMesh& mesh, const Pose& camera, const CameraIntrinsics& intr, Rng& rng,
                       std::size_t dense_count = kDefaultDenseSurfaceCount);

}  // namespace qd
