#include "qd/hand/hand_geometry.hpp"

#include "qd/error.hpp"

namespace qd {

void HandGeometry::validate() const {
  if (!(finger_length > 0.0 && finger_thickness > 0.0 && hand_height > 0.0 && max_aperture > 0.0 &&
        base_depth > 0.0))
    throw InvalidArgument("HandGeometry: all dimensions must be positive");
  if (!(max_aperture > 2.0 * finger_thickness))
    throw InvalidArgument("HandGeometry: max_aperture must exceed twice the finger thickness");
}

Vec3 HandGeometry::outer_half_extents(double aperture) const {
  // The box spans z in [-L/2 - base, L/2]; report a box centered at the origin covering that.
  return Vec3(0.5 * aperture + finger_thickness, 0.5 * hand_height, 0.5 * finger_length + base_depth);
}

bool OrientedBox::contains_strict(const Vec3& p) const {
  Vec3 local = frame.inverse_transform(p);
  return (local.cwiseAbs().array() < half_extents.array()).all();
}

bool OrientedBox::contains_closed(const Vec3& p) const {
  Vec3 local = frame.inverse_transform(p);
  return (local.cwiseAbs().array() <= half_extents.array()).all();
}

std::array<OrientedBox, 3> hand_occupancy(const Pose& pose, const HandGeometry& hand, double aperture) {
  const double half_a = 0.5 * aperture;
  const double t = hand.finger_thickness;
  const Vec3 finger_half(0.5 * t, 0.5 * hand.hand_height, 0.5 * hand.finger_length);
  const Vec3 base_half(half_a + t, 0.5 * hand.hand_height, 0.5 * hand.base_depth);
  auto at = [&](const Vec3& local_center) {
    return pose * Pose::from_translation(local_center);
  };
  return {OrientedBox{at(Vec3(half_a + 0.5 * t, 0.0, 0.0)), finger_half},
          OrientedBox{at(Vec3(-half_a - 0.5 * t, 0.0, 0.0)), finger_half},
          OrientedBox{at(Vec3(0.0, 0.0, -0.5 * hand.finger_length - 0.5 * hand.base_depth)), base_half}};
}

}  // namespace qd
