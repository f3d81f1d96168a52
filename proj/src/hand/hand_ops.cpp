#include "qd/hand/hand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qd/error.hpp"

namespace qd {

Pose grasp_pose(const Vec3& sample, const OrientationGrid& grid, int orientation_index, const HandGeometry& hand,
                const Mat3& grid_to_world) {
  (void)hand;  // the frame origin is the closing-region centroid for every geometry
  return Pose(grid_to_world * grid.rotation(orientation_index), sample);
}

Eigen::Matrix3Xd to_hand_frame(std::span<const Vec3> points, const Pose& pose) {
  return pose.rotation().transpose() * (as_matrix(points).colwise() - pose.translation());
}

bool collides_local(const Eigen::Matrix3Xd& local, const HandGeometry& hand, double aperture, double advance) {
  const double half_a = 0.5 * aperture;
  const double outer = half_a + hand.finger_thickness;
  const double half_h = 0.5 * hand.hand_height;
  const double half_l = 0.5 * hand.finger_length;
  const double back = -half_l - hand.base_depth;
  const Eigen::Index n = local.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ax = std::abs(local(0, i));
    const double ay = std::abs(local(1, i));
    const double z = local(2, i) - advance;
    if (!(ay < half_h) || !(ax < outer)) continue;
    const bool finger = ax > half_a && z > -half_l && z < half_l;
    const bool base = z > back && z < -half_l;
    if (finger || base) return true;
  }
  return false;
}

std::vector<std::size_t> closing_region_local(const Eigen::Matrix3Xd& local, const HandGeometry& hand,
                                              double aperture, double advance) {
  const double half_a = 0.5 * aperture;
  const double half_h = 0.5 * hand.hand_height;
  const double half_l = 0.5 * hand.finger_length;
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < local.cols(); ++i) {
    if (std::abs(local(0, i)) <= half_a && std::abs(local(1, i)) <= half_h &&
        std::abs(local(2, i) - advance) <= half_l)
      out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

bool in_collision(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand, double aperture) {
  if (points.empty()) return false;
  return collides_local(to_hand_frame(points, pose), hand, aperture);
}

bool in_collision(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand, double aperture) {
  return in_collision(std::span<const Vec3>(cloud.points), pose, hand, aperture);
}

bool in_collision(const SpatialIndex& index, const Pose& pose, const HandGeometry& hand, double aperture) {
  if (index.size() == 0) return false;
  // Bounding sphere of the hand: its box spans z in [-L/2 - base, L/2].
  const Vec3 half = hand.outer_half_extents(aperture);
  const double z_center = -0.5 * hand.base_depth;
  const Vec3 center = pose.transform(Vec3(0.0, 0.0, z_center));
  std::vector<Vec3> near;
  for (std::size_t i : index.radius_search(center, half.norm())) near.push_back(index.point(i));
  return in_collision(near, pose, hand, aperture);
}

std::vector<std::size_t> closing_region_points(std::span<const Vec3> points, const Pose& pose,
                                               const HandGeometry& hand, double aperture) {
  if (points.empty()) return {};
  return closing_region_local(to_hand_frame(points, pose), hand, aperture);
}

std::vector<std::size_t> closing_region_points(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand,
                                               double aperture) {
  return closing_region_points(std::span<const Vec3>(cloud.points), pose, hand, aperture);
}

namespace {

// Number of closing-region points at `advance` (early exit once one is found).
bool region_nonempty(const Eigen::Matrix3Xd& local, const HandGeometry& hand, double advance) {
  const double half_a = 0.5 * hand.max_aperture;
  const double half_h = 0.5 * hand.hand_height;
  const double half_l = 0.5 * hand.finger_length;
  for (Eigen::Index i = 0; i < local.cols(); ++i)
    if (std::abs(local(0, i)) <= half_a && std::abs(local(1, i)) <= half_h &&
        std::abs(local(2, i) - advance) <= half_l)
      return true;
  return false;
}

}  // namespace

std::optional<Pose> push_forward(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand,
                                 double step) {
  if (!(step > 0.0)) throw InvalidArgument("push_forward: step must be positive");
  if (points.empty()) return std::nullopt;
  const Eigen::Matrix3Xd local = to_hand_frame(points, pose);

  // Nearest point (along the approach axis) in the closing-region column.
  const double half_a = 0.5 * hand.max_aperture;
  const double half_h = 0.5 * hand.hand_height;
  const double half_l = 0.5 * hand.finger_length;
  double z_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < local.cols(); ++i)
    if (std::abs(local(0, i)) <= half_a && std::abs(local(1, i)) <= half_h) z_min = std::min(z_min, local(2, i));
  if (!std::isfinite(z_min)) return std::nullopt;

  // At `start` every column point is beyond the fingertips. The half-step
  // offset keeps the nearest point off the box faces at every advance.
  const double start = z_min - half_l - 0.5 * step;
  const int steps = static_cast<int>(std::floor((hand.finger_length + hand.base_depth) / step + 1e-9));
  std::optional<double> best;
  for (int j = 0; j <= steps; ++j) {
    const double advance = start + j * step;
    if (collides_local(local, hand, hand.max_aperture, advance)) break;
    if (region_nonempty(local, hand, advance)) best = advance;
  }
  if (!best) return std::nullopt;
  return pose.translated(*best * pose.rotation().col(2));
}

std::optional<Pose> push_forward(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand, double step) {
  return push_forward(std::span<const Vec3>(cloud.points), pose, hand, step);
}

Pose center_laterally(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand) {
  if (points.empty()) return pose;
  const Eigen::Matrix3Xd local = to_hand_frame(points, pose);
  const auto region = closing_region_local(local, hand, hand.max_aperture);
  if (region.empty()) return pose;
  double mean_x = 0.0;
  for (std::size_t i : region) mean_x += local(0, static_cast<Eigen::Index>(i));
  mean_x /= static_cast<double>(region.size());
  return pose.translated(mean_x * pose.rotation().col(0));
}

Pose center_laterally(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand) {
  return center_laterally(std::span<const Vec3>(cloud.points), pose, hand);
}

RefinedGrasp refine_grasp(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand, double step) {
  RefinedGrasp out{center_laterally(points, pose, hand)};
  out.lateral_shift = (out.pose.translation() - pose.translation()).dot(pose.rotation().col(0));
  if (points.empty()) return out;

  const Eigen::Matrix3Xd local = to_hand_frame(points, out.pose);
  const auto region = closing_region_local(local, hand, hand.max_aperture);
  if (region.empty()) return out;
  const double palm = -0.5 * hand.finger_length;
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i : region) gap = std::min(gap, local(2, static_cast<Eigen::Index>(i)) - palm);
  if (gap <= 0.5 * hand.finger_length) return out;

  const int steps = static_cast<int>(std::floor((hand.finger_length + hand.base_depth) / step + 1e-9));
  double advance = 0.0;
  for (int j = 1; j <= steps; ++j) {
    if (collides_local(local, hand, hand.max_aperture, j * step)) break;
    advance = j * step;
  }
  out.forward_shift = advance;
  out.pose = out.pose.translated(advance * out.pose.rotation().col(2));
  return out;
}

double required_aperture(std::span<const Vec3> points, const Pose& pose, const HandGeometry& hand) {
  if (points.empty()) return 0.0;
  const Eigen::Matrix3Xd local = to_hand_frame(points, pose);
  const auto region = closing_region_local(local, hand, hand.max_aperture);
  if (region.empty()) return 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i : region) {
    lo = std::min(lo, local(0, static_cast<Eigen::Index>(i)));
    hi = std::max(hi, local(0, static_cast<Eigen::Index>(i)));
  }
  return hi - lo;
}

}  // namespace qd
