#include "qd/pipeline/cluster.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace qd {

namespace {

double axis_angle_deg(const Vec3& a, const Vec3& b) {
  return rad2deg(std::acos(std::clamp(a.dot(b), -1.0, 1.0)));
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

bool grasps_aligned(const Pose& a, const Pose& b, double pos_tol, double angle_tol_deg) {
  if ((a.translation() - b.translation()).norm() >= pos_tol) return false;
  if (axis_angle_deg(a.rotation().col(2), b.rotation().col(2)) >= angle_tol_deg) return false;
  const double closing = axis_angle_deg(a.rotation().col(0), b.rotation().col(0));
  return std::min(closing, 180.0 - closing) < angle_tol_deg;
}

std::vector<GraspCluster> cluster_grasps(std::span<const Pose> poses, double pos_tol, double angle_tol_deg) {
  const std::size_t n = poses.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (grasps_aligned(poses[i], poses[j], pos_tol, angle_tol_deg)) {
        std::size_t a = find_root(parent, i), b = find_root(parent, j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  std::vector<GraspCluster> clusters;
  std::vector<std::size_t> slot(n, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = find_root(parent, i);
    if (slot[r] == std::numeric_limits<std::size_t>::max()) {
      slot[r] = clusters.size();
      clusters.emplace_back();
    }
    clusters[slot[r]].members.push_back(i);
  }

  for (GraspCluster& c : clusters) {
    Vec3 mean = Vec3::Zero();
    for (std::size_t i : c.members) mean += poses[i].translation();
    mean /= static_cast<double>(c.members.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : c.members) {
      double cost = 0.0;
      for (std::size_t j : c.members) cost += rotation_angle_between(poses[i].rotation(), poses[j].rotation());
      if (cost < best) {
        best = cost;
        c.medoid = i;
      }
    }
    c.center = poses[c.medoid].with_translation(mean);
  }
  return clusters;
}

}  // namespace qd
