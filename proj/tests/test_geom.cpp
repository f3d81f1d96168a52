#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "qd/error.hpp"
#include "qd/geom/io.hpp"
#include "qd/geom/mesh.hpp"
#include "qd/geom/normals.hpp"
#include "qd/geom/point_cloud.hpp"
#include "qd/geom/pose.hpp"
#include "qd/geom/rng.hpp"
#include "qd/geom/sampling.hpp"
#include "qd/geom/spatial_index.hpp"
#include "support/brute.hpp"

using namespace qd;

namespace {

Pose rz(double deg) { return Pose::from_axis_angle(Vec3::UnitZ(), deg2rad(deg)); }

bool poses_close(const Pose& a, const Pose& b, double tol) {
  return (a.rotation() - b.rotation()).cwiseAbs().maxCoeff() <= tol &&
         (a.translation() - b.translation()).cwiseAbs().maxCoeff() <= tol;
}

Pose random_pose(Rng& rng) {
  return Pose(random_rotation(rng), Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
}

PointCloud planar_grid(const Vec3& viewpoint) {
  PointCloud c;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) c.points.emplace_back(0.01 * i, 0.01 * j, 0.0);
  c.viewpoint = viewpoint;
  return c;
}

}  // namespace

TEST_CASE("pose: identity composition and transform") {
  CHECK(poses_close(compose(Pose::identity(), Pose::identity()), Pose::identity(), 0.0));
  CHECK(transform(Pose::identity(), Vec3(1, 2, 3)) == Vec3(1, 2, 3));
}

TEST_CASE("pose: two quarter turns about z make a half turn") {
  CHECK(poses_close(compose(rz(90), rz(90)), rz(180), 1e-12));
}

TEST_CASE("pose: compose with inverse is identity and transform distributes") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng);
    CHECK(poses_close(compose(a, invert(a)), Pose::identity(), 1e-9));
    const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK((transform(compose(a, b), p) - transform(a, transform(b, p))).norm() < 1e-12);
  }
}

TEST_CASE("pose: construction rejects non-rotations") {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 2.0;
  CHECK_THROWS_AS(Pose(m, Vec3::Zero()), InvalidArgument);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;
  CHECK_THROWS_AS(Pose(reflect, Vec3::Zero()), InvalidArgument);
}

TEST_CASE("pose: rotations stay orthonormal over a million compositions") {
  Rng rng(5);
  std::vector<Pose> steps;
  for (int i = 0; i < 64; ++i) steps.push_back(Pose(random_rotation(rng), Vec3::Zero()));
  Pose acc;
  for (int i = 0; i < 1000000; ++i) acc = acc * steps[static_cast<std::size_t>(i) & 63];
  CHECK(acc.orthonormality_error() < 1e-9);
  CHECK(std::abs(acc.rotation().determinant() - 1.0) < 1e-9);
}

TEST_CASE("rng: same seed, same stream; children are independent streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c1 = Rng(42).child("x"), c2 = Rng(42).child("x"), d = Rng(42).child("y");
  CHECK(c1.next_u64() == c2.next_u64());
  CHECK(Rng(42).child("x").next_u64() != d.next_u64());
  CHECK(Rng(42).child(std::uint64_t{1}).next_u64() != Rng(42).child(std::uint64_t{2}).next_u64());
}

TEST_CASE("rng: fixed reference values") {
  // SplitMix64 finalizer of the golden-ratio increment, a published test vector.
  CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("rng: uniform draws pass a KS test and below() stays in range") {
  Rng rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(rng.uniform());
  CHECK(qdtest::ks_uniform(xs, 0.0, 1.0) < qdtest::ks_critical_01(xs.size()));
  for (int i = 0; i < 1000; ++i) CHECK(rng.below(7) < 7);
}

TEST_CASE("rng: shuffle is a permutation") {
  Rng rng(9);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  rng.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("spatial index: radius queries equal brute-force scans") {
  Rng rng(17);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  SpatialIndex index(pts);
  for (int q = 0; q < 50; ++q) {
    const Vec3 c(rng.uniform(), rng.uniform(), rng.uniform());
    const double r = rng.uniform(0.0, 0.3);
    std::vector<std::size_t> brute;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if ((pts[i] - c).norm() <= r) brute.push_back(i);
    CHECK(index.radius_search(c, r) == brute);
  }
}

TEST_CASE("spatial index: knn equals a sorted brute-force scan") {
  Rng rng(18);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  SpatialIndex index(pts);
  for (int q = 0; q < 30; ++q) {
    const Vec3 c(rng.uniform(), rng.uniform(), rng.uniform());
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = (pts[a] - c).squaredNorm(), db = (pts[b] - c).squaredNorm();
      return da < db || (da == db && a < b);
    });
    order.resize(12);
    CHECK(index.knn_search(c, 12) == order);
    CHECK(index.nearest(c) == order[0]);
  }
}

TEST_CASE("normals: planar grid faces the viewpoint") {
  NormalParams p;
  p.k = 8;
  p.radius = 0.0;
  for (double s : {1.0, -1.0}) {
    const auto est = estimate_normals(planar_grid(Vec3(0.05, 0.05, s)), p);
    for (const Vec3& n : *est.cloud.normals) CHECK((n - Vec3(0, 0, s)).norm() < 1e-9);
    CHECK(est.degenerate.empty());
  }
}

TEST_CASE("normals: sphere samples within 5 degrees of radial") {
  Rng rng(4);
  PointCloud c;
  for (int i = 0; i < 20000; ++i) c.points.push_back(rng.unit_vector());
  c.viewpoint = Vec3::Zero();  // inside: normals face the center
  NormalParams p;
  p.k = 10;
  p.radius = 0.0;
  const auto est = estimate_normals(c, p);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(qdtest::angle_between((*est.cloud.normals)[i], -c.points[i]) < deg2rad(5.0));
}

TEST_CASE("normals: collinear neighborhoods are flagged and face the viewpoint") {
  PointCloud c;
  for (int i = 0; i < 10; ++i) c.points.emplace_back(0.01 * i, 0.0, 0.0);
  c.viewpoint = Vec3(0, 1, 0);
  NormalParams p;
  p.k = 5;
  p.radius = 0.0;
  const auto est = estimate_normals(c, p);
  CHECK(est.degenerate.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(((*est.cloud.normals)[i] - (c.viewpoint - c.points[i]).normalized()).norm() < 1e-12);
}

TEST_CASE("normals: invariant under rigid motion") {
  Rng rng(21);
  PointCloud c;
  for (int i = 0; i < 400; ++i) {
    const Vec3 u = rng.unit_vector();
    c.points.push_back(0.05 * Vec3(u.x(), u.y(), 0.3 * u.z()));
  }
  c.viewpoint = Vec3(0.3, 0.1, 0.5);
  const auto base = estimate_normals(c);
  for (int trial = 0; trial < 10; ++trial) {
    const Pose t = random_pose(rng);
    const auto moved = estimate_normals(c.transformed(t));
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(((*moved.cloud.normals)[i] - t.rotate((*base.cloud.normals)[i])).norm() < 1e-6);
  }
}

TEST_CASE("viewpoints: count, radius, determinism and centering") {
  Rng a(1), b(1);
  const auto va = sample_sphere_viewpoints(a, 20, 0.5);
  const auto vb = sample_sphere_viewpoints(b, 20, 0.5);
  REQUIRE(va.size() == 20);
  for (std::size_t i = 0; i < va.size(); ++i) {
    CHECK(std::abs(va[i].translation().norm() - 0.5) < 1e-9);
    CHECK(poses_close(va[i], vb[i], 0.0));
    // Optical axis points at the origin.
    CHECK((va[i].rotation().col(2) + va[i].translation().normalized()).norm() < 1e-9);
  }
  Rng c(2);
  Vec3 mean = Vec3::Zero();
  const auto many = sample_sphere_viewpoints(c, 10000, 0.5);
  for (const Pose& p : many) mean += p.translation();
  CHECK((mean / 10000.0).norm() < 0.02);
}

TEST_CASE("look_at: up convention") {
  const Pose cam = look_at(Vec3(1, 0, 0), Vec3::Zero());
  // Image y points down, so world +z maps to camera -y.
  const Vec3 up_cam = cam.rotation().transpose() * Vec3::UnitZ();
  CHECK(up_cam.y() < -0.999);
  const Pose down = look_at(Vec3(0, 0, 1), Vec3::Zero());
  CHECK(down.orthonormality_error() < 1e-12);
  CHECK((down.rotation().col(2) - Vec3(0, 0, -1)).norm() < 1e-12);
}

TEST_CASE("perturbation: zero magnitudes give the identity") {
  Rng rng(6);
  CHECK(poses_close(random_perturbation(rng, 0.0, 0.0), Pose::identity(), 1e-15));
}

TEST_CASE("perturbation: bounded and angle uniform by KS test") {
  Rng rng(7);
  std::vector<double> angles;
  for (int i = 0; i < 10000; ++i) {
    const Pose p = random_perturbation(rng, 5.0, 0.003);
    const double a = rad2deg(rotation_angle_between(p.rotation(), Mat3::Identity()));
    CHECK(a <= 5.0 + 1e-9);
    CHECK(p.translation().norm() <= 0.003 + 1e-15);
    angles.push_back(a);
  }
  CHECK(qdtest::ks_uniform(angles, 0.0, 5.0) < qdtest::ks_critical_01(angles.size()));
}

TEST_CASE("point cloud: validate rejects bad normals") {
  PointCloud c = planar_grid(Vec3(0, 0, 1));
  c.normals = std::vector<Vec3>(c.size(), Vec3(0, 0, 1));
  CHECK_NOTHROW(c.validate());
  (*c.normals)[3] = Vec3(0, 0, -1);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  (*c.normals)[3] = Vec3(0, 0, 2);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("mesh: validate rejects bad indices and slivers") {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  CHECK_NOTHROW(m.validate());
  m.triangles = {{0, 1, 3}};
  CHECK_THROWS_AS(m.validate(), DegenerateMesh);
  m.vertices.push_back(Vec3(2, 0, 0));
  m.triangles = {{0, 1, 3}};
  CHECK_THROWS_AS(m.validate(), DegenerateMesh);
}

TEST_CASE("io: PLY round trip is lossless; OFF and OBJ load") {
  const auto dir = std::filesystem::temp_directory_path() / "qd_test_geom_io";
  std::filesystem::create_directories(dir);
  Rng rng(8);
  PointCloud c;
  for (int i = 0; i < 50; ++i) c.points.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  c.normals.emplace();
  for (int i = 0; i < 50; ++i) c.normals->push_back(rng.unit_vector());
  c.viewpoint = Vec3(0.1, 0.2, 0.3);
  write_ply(dir / "c.ply", c);
  const PointCloud r = read_ply(dir / "c.ply");
  CHECK(r.points == c.points);
  CHECK(*r.normals == *c.normals);
  CHECK(r.viewpoint == c.viewpoint);

  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  write_off(dir / "m.off", m);
  const TriangleMesh mo = read_mesh(dir / "m.off");
  CHECK(mo.vertices == m.vertices);
  CHECK(mo.triangles == m.triangles);
  {
    std::ofstream f(dir / "q.obj");
    f << "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n";
  }
  const TriangleMesh q = read_mesh(dir / "q.obj");
  CHECK(q.triangles.size() == 2);
  CHECK(std::abs(q.surface_area() - 1.0) < 1e-12);
  {
    std::ofstream f(dir / "bad.off");
    f << "OFF\n3 1 0\n0 0 0\n1 0 0\n";
  }
  CHECK_THROWS_AS(read_mesh(dir / "bad.off"), FormatError);
  std::filesystem::remove_all(dir);
}
