#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "qd/geom/pose.hpp"

namespace qd {

// Observed points with optional unit normals and the sensor origin that saw them.
struct PointCloud {
  std::vector<Vec3> points;
  std::optional<std::vector<Vec3>> normals;
  Vec3 viewpoint = Vec3::Zero();

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return normals.has_value(); }

  // Throws InvalidArgument if normals are present but not unit length, not
  // facing the viewpoint, or not one per point.
  void validate() const;

  // Points, normals and viewpoint mapped through `pose`.
  PointCloud transformed(const Pose& pose) const;
  PointCloud subset(std::span<const std::size_t> indices) const;
  Vec3 centroid() const;
};

// Column view over contiguous Vec3 storage (3 x N, no copy).
inline Eigen::Map<const Eigen::Matrix3Xd> as_matrix(std::span<const Vec3> pts) {
  return Eigen::Map<const Eigen::Matrix3Xd>(pts.empty() ? nullptr : pts.data()->data(), 3,
                                            static_cast<Eigen::Index>(pts.size()));
}

}  // namespace qd
