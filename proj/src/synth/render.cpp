#include "qd/synth/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qd/error.hpp"

namespace qd {

CameraIntrinsics CameraIntrinsics::from_fov(int width, int height, double horizontal_fov_deg) {
  CameraIntrinsics c;
  c.width = width;
  c.height = height;
  c.fx = c.fy = 0.5 * width / std::tan(0.5 * deg2rad(horizontal_fov_deg));
  c.cx = 0.5 * width;
  c.cy = 0.5 * height;
  c.validate();
  return c;
}

void CameraIntrinsics::validate() const {
  if (width <= 0 || height <= 0 || !(fx > 0.0) || !(fy > 0.0) || cx < 0.0 || cx >= width || cy < 0.0 ||
      cy >= height)
    throw InvalidArgument("CameraIntrinsics: invalid parameters");
}

std::optional<double> intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& v0, const Vec3& v1,
                                             const Vec3& v2, double t_min) {
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-18) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - v0;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t <= t_min) return std::nullopt;
  return t;
}

PointCloud render_depth(const TriangleMesh& mesh, const Pose& camera, const CameraIntrinsics& intr) {
  intr.validate();
  PointCloud cloud;
  cloud.viewpoint = camera.translation();
  if (mesh.empty()) return cloud;

  const int w = intr.width, h = intr.height;
  std::vector<double> depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());

  // Vertices in the camera frame.
  std::vector<Vec3> cv;
  cv.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) cv.push_back(camera.inverse_transform(v));

  auto ray_dir = [&](int u, int v) {
    return Vec3((u + 0.5 - intr.cx) / intr.fx, (v + 0.5 - intr.cy) / intr.fy, 1.0);
  };

  for (const auto& tri : mesh.triangles) {
    const Vec3 &a = cv[tri[0]], &b = cv[tri[1]], &c = cv[tri[2]];
    // Pixel footprint of the projected triangle; triangles touching the
    // camera plane fall back to the whole image.
    int u0 = 0, u1 = w - 1, v0 = 0, v1 = h - 1;
    constexpr double kNear = 1e-9;
    if (a.z() > kNear && b.z() > kNear && c.z() > kNear) {
      double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
      for (const Vec3* p : {&a, &b, &c}) {
        double pu = intr.fx * p->x() / p->z() + intr.cx - 0.5;
        double pv = intr.fy * p->y() / p->z() + intr.cy - 0.5;
        umin = std::min(umin, pu);
        umax = std::max(umax, pu);
        vmin = std::min(vmin, pv);
        vmax = std::max(vmax, pv);
      }
      u0 = std::max(0, static_cast<int>(std::floor(umin)));
      u1 = std::min(w - 1, static_cast<int>(std::ceil(umax)));
      v0 = std::max(0, static_cast<int>(std::floor(vmin)));
      v1 = std::min(h - 1, static_cast<int>(std::ceil(vmax)));
    } else if (a.z() <= kNear && b.z() <= kNear && c.z() <= kNear) {
      continue;
    }
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        // dir has unit z, so the ray parameter equals camera-frame depth.
        auto t = intersect_ray_triangle(Vec3::Zero(), ray_dir(u, v), a, b, c);
        if (!t) continue;
        double& d = depth[static_cast<std::size_t>(v) * w + u];
        if (*t < d) d = *t;
      }
    }
  }

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double d = depth[static_cast<std::size_t>(v) * w + u];
      if (!std::isfinite(d)) continue;
      cloud.points.push_back(camera.transform(d * ray_dir(u, v)));
    }
  }
  return cloud;
}

PointCloud sample_surface(const TriangleMesh& mesh, Rng& rng, std::size_t count) {
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    total += mesh.triangle_area(i);
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw DegenerateMesh("sample_surface: mesh has zero area");

  PointCloud out;
  out.points.reserve(count);
  std::vector<Vec3> normals;
  normals.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double r = rng.uniform() * total;
    std::size_t i = std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin();
    i = std::min(i, cumulative.size() - 1);
    const auto& tri = mesh.triangles[i];
    double s = std::sqrt(rng.uniform());
    double t = rng.uniform();
    // Uniform barycentric sample.
    Vec3 p = (1.0 - s) * mesh.vertices[tri[0]] + s * (1.0 - t) * mesh.vertices[tri[1]] +
             s * t * mesh.vertices[tri[2]];
    out.points.push_back(p);
    normals.push_back(mesh.triangle_normal(i));
  }
  out.normals = std::move(normals);
  return out;
}

TriangleMesh scale_to_extents(const TriangleMesh& mesh, Rng& rng, double lo, double hi, double* applied_scale) {
  if (mesh.vertices.empty()) throw DegenerateMesh("scale_to_extents: empty mesh");
  if (!(lo > 0.0) || hi < lo) throw InvalidArgument("scale_to_extents: need 0 < lo <= hi");
  auto [bmin, bmax] = mesh.bounds();
  double extent = (bmax - bmin).maxCoeff();
  if (!(extent > 0.0)) throw DegenerateMesh("scale_to_extents: zero bounding box");
  double target = lo == hi ? lo : rng.uniform(lo, hi);
  double scale = target / extent;
  Vec3 center = 0.5 * (bmin + bmax);
  TriangleMesh out;
  out.triangles = mesh.triangles;
  out.vertices.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) out.vertices.push_back(scale * (v - center));
  if (applied_scale) *applied_scale = scale;
  return out;
}

}  // namespace qd
