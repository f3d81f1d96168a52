#include "qd/geom/mesh.hpp"

#include "qd/error.hpp"

namespace qd {

void TriangleMesh::validate() const {
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    for (std::uint32_t idx : triangles[i])
      if (idx >= vertices.size()) throw DegenerateMesh("mesh: triangle index out of range");
    if (!(triangle_area(i) > 1e-12)) throw DegenerateMesh("mesh: triangle with zero area");
  }
}

double TriangleMesh::triangle_area(std::size_t i) const {
  const auto& t = triangles[i];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

Vec3 TriangleMesh::triangle_normal(std::size_t i) const {
  const auto& t = triangles[i];
  return (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).normalized();
}

double TriangleMesh::surface_area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) a += triangle_area(i);
  return a;
}

double TriangleMesh::volume() const {
  double v = 0.0;
  for (const auto& t : triangles)
    v += vertices[t[0]].dot(vertices[t[1]].cross(vertices[t[2]]));
  return v / 6.0;
}

std::array<Vec3, 2> TriangleMesh::bounds() const {
  if (vertices.empty()) return {Vec3::Zero(), Vec3::Zero()};
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const Vec3& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

TriangleMesh TriangleMesh::transformed(const Pose& pose) const {
  TriangleMesh out;
  out.triangles = triangles;
  out.vertices.reserve(vertices.size());
  for (const Vec3& v : vertices) out.vertices.push_back(pose.transform(v));
  return out;
}

}  // namespace qd
