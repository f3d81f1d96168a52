#pragma once

#include <array>

#include "qd/geom/pose.hpp"

namespace qd {

// Parallel-jaw gripper dimensions in meters. Defaults follow a Robotiq 2F-85.
//
// Hand frame: origin at the centroid of the closing region; x is the
// closing direction, y the hand-height axis, z the approach direction.
// The closing region spans |x| <= aperture/2, |y| <= hand_height/2,
// |z| <= finger_length/2. Fingers sit outside it along x, the base plate
// sits behind it (z < -finger_length/2).
struct HandGeometry {
  double finger_length = 0.04;
  double finger_thickness = 0.01;
  double hand_height = 0.02;
  double max_aperture = 0.085;
  double base_depth = 0.02;

  void validate() const;
  // Half extents of the whole hand's bounding box in the hand frame.
  Vec3 outer_half_extents(double aperture) const;
};

struct OrientedBox {
  Pose frame;         // box center and axes
  Vec3 half_extents;  // along the frame axes

  bool contains_strict(const Vec3& p) const;
  bool contains_closed(const Vec3& p) const;
};

// Two fingers at +-aperture/2 along the closing axis and the base plate.
// Order: finger on the +x side, finger on the -x side, base.
std::array<OrientedBox, 3> hand_occupancy(const Pose& pose, const HandGeometry& hand, double aperture);

}  // namespace qd
