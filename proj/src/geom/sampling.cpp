#include "qd/geom/sampling.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "qd/error.hpp"

namespace qd {

std::vector<Pose> sample_sphere_viewpoints(Rng& rng, std::size_t count, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("sample_sphere_viewpoints: radius must be positive");
  std::vector<Pose> cams;
  cams.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vec3 eye = radius * rng.unit_vector();
    cams.push_back(look_at(eye, Vec3::Zero()));
  }
  return cams;
}

Pose random_perturbation(Rng& rng, double max_angle_deg, double max_translation) {
  if (max_angle_deg < 0.0 || max_translation < 0.0)
    throw InvalidArgument("random_perturbation: negative magnitude");
  Vec3 axis = rng.unit_vector();
  double angle = deg2rad(rng.uniform(0.0, max_angle_deg));
  Vec3 dir = rng.unit_vector();
  double mag = rng.uniform(0.0, max_translation);
  return Pose::from_axis_angle(axis, angle, mag * dir);
}

Mat3 random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace qd
