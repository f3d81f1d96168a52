#include "qd/geom/point_cloud.hpp"

#include <cmath>

#include "qd/error.hpp"

namespace qd {

static_assert(sizeof(Vec3) == 3 * sizeof(double), "Vec3 must be tightly packed");

void PointCloud::validate() const {
  if (!normals) return;
  if (normals->size() != points.size()) throw InvalidArgument("PointCloud: normal count mismatch");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& n = (*normals)[i];
    if (std::abs(n.norm() - 1.0) >= 1e-6) throw InvalidArgument("PointCloud: normal not unit length");
    if (n.dot(viewpoint - points[i]) < 0.0)
      throw InvalidArgument("PointCloud: normal faces away from viewpoint");
  }
}

PointCloud PointCloud::transformed(const Pose& pose) const {
  PointCloud out;
  out.points.reserve(points.size());
  for (const Vec3& p : points) out.points.push_back(pose.transform(p));
  if (normals) {
    std::vector<Vec3> ns;
    ns.reserve(normals->size());
    for (const Vec3& n : *normals) ns.push_back(pose.rotate(n));
    out.normals = std::move(ns);
  }
  out.viewpoint = pose.transform(viewpoint);
  return out;
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices) const {
  PointCloud out;
  out.viewpoint = viewpoint;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(points.at(i));
  if (normals) {
    std::vector<Vec3> ns;
    ns.reserve(indices.size());
    for (std::size_t i : indices) ns.push_back(normals->at(i));
    out.normals = std::move(ns);
  }
  return out;
}

Vec3 PointCloud::centroid() const {
  Vec3 c = Vec3::Zero();
  if (points.empty()) return c;
  for (const Vec3& p : points) c += p;
  return c / static_cast<double>(points.size());
}

}  // namespace qd
