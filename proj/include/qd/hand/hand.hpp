#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qd/geom/point_cloud.hpp"
#include "qd/geom/spatial_index.hpp"
#include "qd/hand/hand_geometry.hpp"
#include "qd/hand/orientation_grid.hpp"

namespace qd {

inline constexpr double kDefaultPushStep = 0.002;

// Hand pose for grid orientation `orientation_index` with the closing-region
// centroid at `sample`. `grid_to_world` maps grid-frame directions to the
// sample's frame (the camera rotation when the grid lives in camera frame).
Pose grasp_pose(const Vec3& sample, const OrientationGrid& grid, int orientation_index, const HandGeometry& hand,
                const Mat3& grid_to_world = Mat3::Identity());

// Points expressed in the hand frame of `pose` (3 x N).
Eigen::Matrix3Xd to_hand_frame(std::span<const Vec3> points, const Pose& pose);

// Occupancy tests on hand-frame coordinates, with the hand shifted by
// `advance` along its approach axis.
bool collides_local(const Eigen::Matrix3Xd& local, const HandGeometry& hand, double aperture, double advance = 0.0);
std::vector<std::size_t> closing_region_local(const Eigen::Matrix3Xd& local, const HandGeometry& hand,
                                              double aperture, double advance = 0.0);

// True iff some point lies strictly inside a finger or the base plate.
bool in_collision(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand, double aperture);
bool in_collision(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand, double aperture);
// Same answer, visiting only the index entries near the hand.
bool in_collision(const SpatialIndex& index, const Pose& pose, const HandGeometry& hand, double aperture);

// Indices of points inside the closed box between the fingers
// (aperture x hand_height x finger_length).
std::vector<std::size_t> closing_region_points(std::span<const Vec3> points, const Pose& pose,
                                               const HandGeometry& hand, double aperture);
std::vector<std::size_t> closing_region_points(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand,
                                               double aperture);

// Retract the hand until its closing region is empty, then advance along the
// approach axis in `step` increments. Returns the last collision-free pose
// whose closing region holds at least one point, or nullopt if none is found
// within finger_length + base_depth of travel.
std::optional<Pose> push_forward(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand,
                                 double step = kDefaultPushStep);
std::optional<Pose> push_forward(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand,
                                 double step = kDefaultPushStep);

// Shift along the closing axis so the closing-region points have zero mean
// closing-axis coordinate. Unchanged when the region is empty.
Pose center_laterally(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand);
Pose center_laterally(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand);

// Pose corrections applied to detected grasps: center laterally, then, when
// the palm is further than `threshold` from the nearest closing-region point,
// advance as far as possible without collision.
struct RefinedGrasp {
  Pose pose;
  double lateral_shift = 0.0;
  double forward_shift = 0.0;
};
RefinedGrasp refine_grasp(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand,
                          double step = kDefaultPushStep);

// Width between the outermost closing-region points along the closing axis (0 if empty).
double required_aperture(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand);

}  // namespace qd
