#include "qd/synth/primitives.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "qd/error.hpp"

namespace qd {

namespace {

void require_positive(std::initializer_list<double> dims, const char* what) {
  for (double d : dims)
    if (!(d > 0.0)) throw InvalidSpec(std::string(what) + ": dimensions must be positive");
}

std::uint32_t add_vertex(TriangleMesh& m, const Vec3& v) {
  m.vertices.push_back(v);
  return static_cast<std::uint32_t>(m.vertices.size() - 1);
}

// Ring of `segments` vertices at height z.
std::uint32_t add_ring(TriangleMesh& m, double radius, double z, int segments) {
  std::uint32_t first = static_cast<std::uint32_t>(m.vertices.size());
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * kPi * i / segments;
    add_vertex(m, Vec3(radius * std::cos(a), radius * std::sin(a), z));
  }
  return first;
}

// Quad strip between ring a (lower) and ring b (upper). `outward` selects the
// winding so normals point away from the axis; otherwise towards it.
void connect_rings(TriangleMesh& m, std::uint32_t a, std::uint32_t b, int segments, bool outward) {
  for (int i = 0; i < segments; ++i) {
    std::uint32_t i0 = i, i1 = (i + 1) % segments;
    if (outward) {
      m.triangles.push_back({a + i0, a + i1, b + i1});
      m.triangles.push_back({a + i0, b + i1, b + i0});
    } else {
      m.triangles.push_back({a + i0, b + i1, a + i1});
      m.triangles.push_back({a + i0, b + i0, b + i1});
    }
  }
}

// Fan from a center vertex; `up` selects +z facing normals.
void cap_ring(TriangleMesh& m, std::uint32_t ring, int segments, double z, bool up) {
  std::uint32_t c = add_vertex(m, Vec3(0.0, 0.0, z));
  for (int i = 0; i < segments; ++i) {
    std::uint32_t i0 = ring + i, i1 = ring + (i + 1) % segments;
    if (up)
      m.triangles.push_back({c, i0, i1});
    else
      m.triangles.push_back({c, i1, i0});
  }
}

void center_on_bounds(TriangleMesh& m) {
  auto [lo, hi] = m.bounds();
  Vec3 c = 0.5 * (lo + hi);
  for (Vec3& v : m.vertices) v -= c;
}

}  // namespace

std::string_view to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Box: return "box";
    case PrimitiveKind::Cylinder: return "cylinder";
    case PrimitiveKind::Sphere: return "sphere";
    case PrimitiveKind::Bottle: return "bottle";
    case PrimitiveKind::Mug: return "mug";
  }
  return "box";
}

PrimitiveKind primitive_from_string(std::string_view name) {
  for (PrimitiveKind k : {PrimitiveKind::Box, PrimitiveKind::Cylinder, PrimitiveKind::Sphere,
                          PrimitiveKind::Bottle, PrimitiveKind::Mug})
    if (to_string(k) == name) return k;
  throw InvalidSpec("unknown primitive: " + std::string(name));
}

TriangleMesh make_box(double sx, double sy, double sz) {
  require_positive({sx, sy, sz}, "box");
  TriangleMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.emplace_back((i & 1 ? 0.5 : -0.5) * sx, (i & 2 ? 0.5 : -0.5) * sy, (i & 4 ? 0.5 : -0.5) * sz);
  // Two triangles per face, counter-clockwise seen from outside.
  m.triangles = {{0, 2, 3}, {0, 3, 1},   // -z
                 {4, 5, 7}, {4, 7, 6},   // +z
                 {0, 1, 5}, {0, 5, 4},   // -y
                 {2, 6, 7}, {2, 7, 3},   // +y
                 {0, 4, 6}, {0, 6, 2},   // -x
                 {1, 3, 7}, {1, 7, 5}};  // +x
  return m;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
  require_positive({radius, height, static_cast<double>(segments - 2)}, "cylinder");
  TriangleMesh m;
  std::uint32_t bottom = add_ring(m, radius, -0.5 * height, segments);
  std::uint32_t top = add_ring(m, radius, 0.5 * height, segments);
  connect_rings(m, bottom, top, segments, true);
  cap_ring(m, bottom, segments, -0.5 * height, false);
  cap_ring(m, top, segments, 0.5 * height, true);
  return m;
}

TriangleMesh make_sphere(double radius, int subdivisions) {
  require_positive({radius, static_cast<double>(subdivisions + 1)}, "sphere");
  TriangleMesh m;
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  for (const Vec3& v : {Vec3(-1, t, 0), Vec3(1, t, 0), Vec3(-1, -t, 0), Vec3(1, -t, 0), Vec3(0, -1, t),
                        Vec3(0, 1, t), Vec3(0, -1, -t), Vec3(0, 1, -t), Vec3(t, 0, -1), Vec3(t, 0, 1),
                        Vec3(-t, 0, -1), Vec3(-t, 0, 1)})
    m.vertices.push_back(v.normalized());
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      std::uint32_t id = add_vertex(m, (m.vertices[a] + m.vertices[b]).normalized());
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<std::array<std::uint32_t, 3>> next;
    next.reserve(m.triangles.size() * 4);
    for (const auto& tri : m.triangles) {
      std::uint32_t a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    m.triangles = std::move(next);
  }
  for (Vec3& v : m.vertices) v *= radius;
  return m;
}

TriangleMesh make_bottle(double radius, double body_height, double neck_radius, double neck_height,
                         int segments) {
  require_positive({radius, body_height, neck_radius, neck_height, static_cast<double>(segments - 2)}, "bottle");
  if (neck_radius >= radius) throw InvalidSpec("bottle: neck must be narrower than body");
  TriangleMesh m;
  double shoulder = radius - neck_radius;  // 45 degree shoulder
  double z0 = 0.0, z1 = body_height, z2 = z1 + shoulder, z3 = z2 + neck_height;
  std::uint32_t r0 = add_ring(m, radius, z0, segments);
  std::uint32_t r1 = add_ring(m, radius, z1, segments);
  std::uint32_t r2 = add_ring(m, neck_radius, z2, segments);
  std::uint32_t r3 = add_ring(m, neck_radius, z3, segments);
  connect_rings(m, r0, r1, segments, true);
  connect_rings(m, r1, r2, segments, true);
  connect_rings(m, r2, r3, segments, true);
  cap_ring(m, r0, segments, z0, false);
  cap_ring(m, r3, segments, z3, true);
  center_on_bounds(m);
  return m;
}

TriangleMesh make_mug(double radius, double height, double wall, int segments) {
  require_positive({radius, height, wall, static_cast<double>(segments - 2)}, "mug");
  if (wall >= radius || wall >= height) throw InvalidSpec("mug: wall too thick");
  TriangleMesh m;
  double inner = radius - wall;
  std::uint32_t outer_bottom = add_ring(m, radius, 0.0, segments);
  std::uint32_t outer_top = add_ring(m, radius, height, segments);
  std::uint32_t inner_top = add_ring(m, inner, height, segments);
  std::uint32_t inner_bottom = add_ring(m, inner, wall, segments);
  connect_rings(m, outer_bottom, outer_top, segments, true);
  connect_rings(m, inner_bottom, inner_top, segments, false);
  // Rim annulus facing +z.
  for (int i = 0; i < segments; ++i) {
    std::uint32_t i0 = i, i1 = (i + 1) % segments;
    m.triangles.push_back({inner_top + i0, outer_top + i0, outer_top + i1});
    m.triangles.push_back({inner_top + i0, outer_top + i1, inner_top + i1});
  }
  cap_ring(m, outer_bottom, segments, 0.0, false);
  cap_ring(m, inner_bottom, segments, wall, true);
  center_on_bounds(m);
  return m;
}

TriangleMesh primitive_library(Rng& rng, const PrimitiveSpec& spec) {
  if (!(spec.min_size > 0.0) || spec.max_size < spec.min_size) throw InvalidSpec("primitive: bad size range");
  auto draw = [&] { return rng.uniform(spec.min_size, spec.max_size); };
  switch (spec.kind) {
    case PrimitiveKind::Box: {
      double x = draw(), y = draw(), z = draw();
      return make_box(x, y, z);
    }
    case PrimitiveKind::Cylinder: {
      double r = 0.5 * draw(), h = draw();
      return make_cylinder(r, h, spec.segments);
    }
    case PrimitiveKind::Sphere:
      return make_sphere(0.5 * draw(), spec.subdivisions);
    case PrimitiveKind::Bottle: {
      double r = 0.5 * draw(), h = draw();
      double neck = r * rng.uniform(0.3, 0.6);
      return make_bottle(r, h, neck, h * rng.uniform(0.2, 0.4), spec.segments);
    }
    case PrimitiveKind::Mug: {
      double r = 0.5 * draw(), h = draw();
      double wall = std::min(r, h) * rng.uniform(0.08, 0.15);
      return make_mug(r, h, wall, spec.segments);
    }
  }
  throw InvalidSpec("primitive: unknown kind");
}

}  // namespace qd
