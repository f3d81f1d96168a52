#pragma once

#include "qd/geom/types.hpp"

namespace qd {

// Rigid transform in SE(3): x -> R x + t.
//
// The rotation is kept orthonormal: construction rejects matrices that are
// not a rotation within 1e-6 and snaps the accepted ones back onto SO(3);
// composition re-orthonormalizes whenever accumulated drift exceeds 1e-10.
class Pose {
 public:
  Pose();
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_translation(const Vec3& t);
  // Rotation by `angle` radians about `axis` (normalized internally).
  static Pose from_axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero());

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 transform(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 rotate(const Vec3& v) const { return rotation_ * v; }
  // R^T (p - t)
  Vec3 inverse_transform(const Vec3& p) const { return rotation_.transpose() * (p - translation_); }

  Pose operator*(const Pose& other) const;
  Pose inverse() const;

  Pose with_translation(const Vec3& t) const;
  // Same rotation, translation moved by `delta` (world frame).
  Pose translated(const Vec3& delta) const { return with_translation(translation_ + delta); }

  // max_ij |R^T R - I|_ij
  double orthonormality_error() const;

 private:
  struct Unchecked {};
  Pose(const Mat3& rotation, const Vec3& translation, Unchecked);

  Mat3 rotation_;
  Vec3 translation_;
};

Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& a);
Vec3 transform(const Pose& a, const Vec3& p);

// Nearest rotation matrix (Gram-Schmidt on the columns, column 2 rebuilt by a cross product).
Mat3 orthonormalize(const Mat3& m);
double orthonormality_error(const Mat3& m);
// Angle of the relative rotation between a and b, radians in [0, pi].
double rotation_angle_between(const Mat3& a, const Mat3& b);
Mat3 axis_angle_matrix(const Vec3& axis, double angle);

// Camera pose at `eye` whose optical axis (+z) points at `target`.
// Image y points down; world +z projected into the image plane is "up"
// (fallback world +x when the optical axis is parallel to z).
Pose look_at(const Vec3& eye, const Vec3& target);

}  // namespace qd
