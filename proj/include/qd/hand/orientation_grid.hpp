#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "qd/geom/types.hpp"

namespace qd {

struct GridParams {
  int num_axes = 49;
  int num_rolls = 4;
  double cap_half_angle_deg = 90.0;
  // Rolls are k * roll_step for k in [0, num_rolls).
  double roll_step_deg = 45.0;

  int size() const { return num_axes * num_rolls; }
  bool operator==(const GridParams&) const = default;
};

// Fixed set of hand orientations scored by the proposal network: approach
// axes on a Fibonacci spiral over the cap centered on the camera axis, each
// combined with `num_rolls` rotations about the approach axis.
//
// Orientation i decodes as (axis i / num_rolls, roll i % num_rolls). Its
// rotation has columns (closing, hand height, approach), expressed in the
// frame `camera_axis` was given in.
class OrientationGrid {
 public:
  explicit OrientationGrid(const Vec3& camera_axis = Vec3::UnitZ(), const GridParams& params = {});

  int size() const { return params_.size(); }
  const GridParams& params() const { return params_; }
  const Vec3& camera_axis() const { return camera_axis_; }

  const Vec3& axis(int axis_index) const { return axes_.at(axis_index); }
  double roll_angle(int roll_index) const;
  const Mat3& rotation(int orientation_index) const { return rotations_.at(orientation_index); }

  int encode(int axis_index, int roll_index) const;
  std::pair<int, int> decode(int orientation_index) const;

  // Grid orientation closest to `rotation`; a parallel-jaw hand is symmetric
  // under a 180 degree roll, so both roll senses are considered.
  int nearest(const Mat3& rotation) const;

 private:
  GridParams params_;
  Vec3 camera_axis_;
  std::vector<Vec3> axes_;
  std::vector<Mat3> rotations_;
};

OrientationGrid build_orientation_grid(const Vec3& camera_axis, const GridParams& params = {});

// Unit vector orthogonal to `axis`: world x with the axis component removed
// (world y when the axis is within ~17 degrees of x).
Vec3 perpendicular_reference(const Vec3& axis);

}  // namespace qd
