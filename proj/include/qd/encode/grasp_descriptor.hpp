#pragma once

#include "qd/encode/height_map.hpp"
#include "qd/hand/hand.hpp"

namespace qd {

struct GraspDescriptor {
  Image image;  // 4 x 60 x 60
  // The closing region held no points; image is all background.
  bool empty_region = false;
};

// Closing-region points (max aperture) in the hand frame, projected along the
// hand-height axis onto the closing x approach plane. Columns span the
// aperture, rows span the finger length (row 0 at the palm).
// Channel 0: max height (0 at -hand_height/2, 1 at +hand_height/2).
// Channels 1-3: per-cell mean hand-frame normal, renormalized, mapped to [0, 1].
// Empty cells: 0 height, 0.5 normals.
GraspDescriptor grasp_descriptor(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand,
                                 int size = kImageSize);

}  // namespace qd
