#pragma once

#include <string>
#include <string_view>

#include "qd/geom/mesh.hpp"
#include "qd/geom/rng.hpp"

namespace qd {

enum class PrimitiveKind { Box, Cylinder, Sphere, Bottle, Mug };

std::string_view to_string(PrimitiveKind kind);
PrimitiveKind primitive_from_string(std::string_view name);

// All generators produce closed, outward-wound meshes centered on the
// bounding box center. Nonpositive dimensions throw InvalidSpec.
TriangleMesh make_box(double sx, double sy, double sz);
TriangleMesh make_cylinder(double radius, double height, int segments = 32);
// Icosphere: subdivided icosahedron with every vertex projected to `radius`.
TriangleMesh make_sphere(double radius, int subdivisions = 3);
// Cylindrical body, conical shoulder, cylindrical neck; closed at both ends.
TriangleMesh make_bottle(double radius, double body_height, double neck_radius, double neck_height,
                         int segments = 32);
// Cup: outer wall, inner wall, rim annulus, outer and inner bottoms.
TriangleMesh make_mug(double radius, double height, double wall, int segments = 32);

// Dimension ranges for a random primitive (meters). Values are drawn
// uniformly; the overall scale is fixed later by scale_to_extents.
struct PrimitiveSpec {
  PrimitiveKind kind = PrimitiveKind::Box;
  double min_size = 0.02;
  double max_size = 0.08;
  int segments = 32;
  int subdivisions = 3;
};

TriangleMesh primitive_library(Rng& rng, const PrimitiveSpec& spec);

}  // namespace qd
