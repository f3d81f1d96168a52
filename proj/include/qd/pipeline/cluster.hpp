#pragma once

#include <span>
#include <vector>

#include "qd/geom/pose.hpp"

namespace qd {

struct GraspCluster {
  std::vector<std::size_t> members;  // ascending indices into the input
  std::size_t medoid = 0;            // member whose orientation is most central
  Pose center;                       // mean translation, medoid orientation
};

// Two grasps align when their translations are closer than pos_tol, their
// approach axes differ by less than angle_tol and their closing axes by less
// than angle_tol modulo 180 degrees. Clusters are the connected components
// of the alignment relation, ordered by their first member.
bool grasps_aligned(const Pose& a, const Pose& b, double pos_tol, double angle_tol_deg);
std::vector<GraspCluster> cluster_grasps(std::span<const Pose> poses, double pos_tol, double angle_tol_deg);

}  // namespace qd
