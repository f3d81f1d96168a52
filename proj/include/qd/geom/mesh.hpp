#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qd/geom/pose.hpp"

namespace qd {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }

  // Throws DegenerateMesh on out-of-range indices or triangles with area <= 1e-12 m^2.
  void validate() const;

  double triangle_area(std::size_t i) const;
  // Unit normal following the counter-clockwise winding.
  Vec3 triangle_normal(std::size_t i) const;
  double surface_area() const;
  // Signed volume (positive for outward-wound closed meshes).
  double volume() const;
  // Axis-aligned bounds; both zero for an empty mesh.
  std::array<Vec3, 2> bounds() const;

  TriangleMesh transformed(const Pose& pose) const;
};

}  // namespace qd
