#include "qd/hand/orientation_grid.hpp"

#include <cmath>
#include <limits>

#include "qd/error.hpp"
#include "qd/geom/pose.hpp"

namespace qd {

Vec3 perpendicular_reference(const Vec3& axis) {
  Vec3 ref = Vec3::UnitX() - axis.x() * axis;
  if (ref.norm() < 0.3) ref = Vec3::UnitY() - axis.y() * axis;
  return ref.normalized();
}

OrientationGrid::OrientationGrid(const Vec3& camera_axis, const GridParams& params)
    : params_(params), camera_axis_(camera_axis.normalized()) {
  if (params.num_axes < 1 || params.num_rolls < 1) throw InvalidArgument("OrientationGrid: empty grid");
  if (!(params.cap_half_angle_deg > 0.0 && params.cap_half_angle_deg <= 180.0))
    throw InvalidArgument("OrientationGrid: cap half-angle out of range");
  if (std::abs(camera_axis.norm() - 1.0) > 1e-6) throw InvalidArgument("OrientationGrid: camera axis not unit");

  const Vec3 u = perpendicular_reference(camera_axis_);
  const Vec3 v = camera_axis_.cross(u);
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  const double cos_max = std::cos(deg2rad(params.cap_half_angle_deg));
  const int n = params.num_axes;

  axes_.reserve(n);
  for (int k = 0; k < n; ++k) {
    // Equal steps in cos(theta) give equal-area bands on the cap.
    double frac = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
    double cos_t = 1.0 - frac * (1.0 - cos_max);
    double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    double phi = k * golden_angle;
    Vec3 a = sin_t * std::cos(phi) * u + sin_t * std::sin(phi) * v + cos_t * camera_axis_;
    axes_.push_back(a.normalized());
  }

  rotations_.reserve(params.size());
  for (int k = 0; k < n; ++k) {
    const Vec3& a = axes_[k];
    Vec3 c0 = u - u.dot(a) * a;
    if (c0.norm() < 0.1) c0 = v - v.dot(a) * a;
    c0.normalize();
    const Vec3 c1 = a.cross(c0);
    for (int r = 0; r < params.num_rolls; ++r) {
      double rho = roll_angle(r);
      Vec3 c = std::cos(rho) * c0 + std::sin(rho) * c1;
      Mat3 rot;
      rot.col(0) = c;
      rot.col(1) = a.cross(c);
      rot.col(2) = a;
      rotations_.push_back(orthonormalize(rot));
    }
  }
}

double OrientationGrid::roll_angle(int roll_index) const { return deg2rad(roll_index * params_.roll_step_deg); }

int OrientationGrid::encode(int axis_index, int roll_index) const {
  if (axis_index < 0 || axis_index >= params_.num_axes || roll_index < 0 || roll_index >= params_.num_rolls)
    throw InvalidArgument("OrientationGrid::encode: index out of range");
  return axis_index * params_.num_rolls + roll_index;
}

std::pair<int, int> OrientationGrid::decode(int orientation_index) const {
  if (orientation_index < 0 || orientation_index >= size())
    throw InvalidArgument("OrientationGrid::decode: index out of range");
  return {orientation_index / params_.num_rolls, orientation_index % params_.num_rolls};
}

int OrientationGrid::nearest(const Mat3& rotation) const {
  Mat3 flipped = rotation;
  flipped.col(0) = -rotation.col(0);
  flipped.col(1) = -rotation.col(1);
  int best = 0;
  double best_angle = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    double d = std::min(rotation_angle_between(rotations_[i], rotation), rotation_angle_between(rotations_[i], flipped));
    if (d < best_angle) {
      best_angle = d;
      best = i;
    }
  }
  return best;
}

OrientationGrid build_orientation_grid(const Vec3& camera_axis, const GridParams& params) {
  return OrientationGrid(camera_axis, params);
}

}  // namespace qd
