#include "qd/synth/scene.hpp"

namespace qd {

SceneSample make_scene(const TriangleMesh& mesh, const Pose& camera, const CameraIntrinsics& intr, Rng& rng,
                       std::size_t dense_count) {
  SceneSample s;
  s.mesh = mesh;
  s.camera = camera;
  s.cloud = render_depth(mesh, camera, intr);
  s.dense_surface = sample_surface(mesh, rng, dense_count);
  return s;
}

}  // namespace qd
