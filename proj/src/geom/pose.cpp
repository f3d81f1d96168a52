#include "qd/geom/pose.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "qd/error.hpp"

namespace qd {

namespace {
constexpr double kAcceptTolerance = 1e-6;
constexpr double kDriftTolerance = 1e-10;
}  // namespace

double orthonormality_error(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 orthonormalize(const Mat3& m) {
  Vec3 c0 = m.col(0).normalized();
  Vec3 c1 = m.col(1) - c0.dot(m.col(1)) * c0;
  c1.normalize();
  Mat3 out;
  out.col(0) = c0;
  out.col(1) = c1;
  out.col(2) = c0.cross(c1);
  return out;
}

Mat3 axis_angle_matrix(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

double rotation_angle_between(const Mat3& a, const Mat3& b) {
  double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Pose::Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

Pose::Pose(const Mat3& rotation, const Vec3& translation, Unchecked)
    : rotation_(rotation), translation_(translation) {}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite())
    throw InvalidArgument("Pose: non-finite entries");
  if (qd::orthonormality_error(rotation) > kAcceptTolerance || rotation.determinant() < 0.0)
    throw InvalidArgument("Pose: matrix is not a rotation");
  if (qd::orthonormality_error(rotation_) > 1e-12) rotation_ = orthonormalize(rotation_);
}

Pose Pose::from_translation(const Vec3& t) { return Pose(Mat3::Identity(), t, Unchecked{}); }

Pose Pose::from_axis_angle(const Vec3& axis, double angle, const Vec3& t) {
  return Pose(axis_angle_matrix(axis, angle), t);
}

Pose Pose::operator*(const Pose& other) const {
  Mat3 r = rotation_ * other.rotation_;
  if (qd::orthonormality_error(r) > kDriftTolerance) r = orthonormalize(r);
  return Pose(r, rotation_ * other.translation_ + translation_, Unchecked{});
}

Pose Pose::inverse() const {
  Mat3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_), Unchecked{});
}

Pose Pose::with_translation(const Vec3& t) const { return Pose(rotation_, t, Unchecked{}); }

double Pose::orthonormality_error() const { return qd::orthonormality_error(rotation_); }

Pose compose(const Pose& a, const Pose& b) { return a * b; }
Pose invert(const Pose& a) { return a.inverse(); }
Vec3 transform(const Pose& a, const Vec3& p) { return a.transform(p); }

Pose look_at(const Vec3& eye, const Vec3& target) {
  Vec3 z = target - eye;
  if (z.norm() <= 0.0) throw InvalidArgument("look_at: eye coincides with target");
  z.normalize();
  Vec3 up(0.0, 0.0, 1.0);
  Vec3 up_proj = up - up.dot(z) * z;
  if (up_proj.norm() < 1e-6) {
    up = Vec3(1.0, 0.0, 0.0);
    up_proj = up - up.dot(z) * z;
  }
  Vec3 y = -up_proj.normalized();
  Vec3 x = y.cross(z);
  Mat3 r;
  r.col(0) = x.normalized();
  r.col(1) = y;
  r.col(2) = z;
  return Pose(r, eye);
}

}  // namespace qd
