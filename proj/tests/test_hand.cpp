#include <doctest.h>

#include "qd/error.hpp"
#include "qd/geom/sampling.hpp"
#include "qd/geom/spatial_index.hpp"
#include "qd/hand/hand.hpp"
#include "qd/hand/orientation_grid.hpp"
#include "qd/synth/primitives.hpp"
#include "qd/synth/render.hpp"
#include "support/brute.hpp"

using namespace qd;

namespace {

std::vector<Vec3> plate(double z, double half_width, double spacing) {
  std::vector<Vec3> pts;
  for (double x = -half_width; x <= half_width + 1e-12; x += spacing)
    for (double y = -half_width; y <= half_width + 1e-12; y += spacing) pts.emplace_back(x, y, z);
  return pts;
}

}  // namespace

TEST_CASE("grid: 196 orientations, axis 0 on the camera axis, all in the hemisphere") {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3 cam = trial == 0 ? Vec3::UnitZ() : rng.unit_vector();
    const OrientationGrid g = build_orientation_grid(cam);
    CHECK(g.size() == 196);
    CHECK((g.axis(0) - cam).norm() < 1e-12);
    for (int a = 0; a < 49; ++a) {
      CHECK(g.axis(a).dot(cam) >= -1e-12);
      for (int b = a + 1; b < 49; ++b) CHECK(qdtest::angle_between(g.axis(a), g.axis(b)) > deg2rad(1.0));
    }
  }
}

TEST_CASE("grid: encode and decode are inverse") {
  const OrientationGrid g;
  for (int i = 0; i < g.size(); ++i) {
    auto [a, r] = g.decode(i);
    CHECK(a == i / 4);
    CHECK(r == i % 4);
    CHECK(g.encode(a, r) == i);
    CHECK(g.nearest(g.rotation(i)) == i);
  }
  CHECK(g.roll_angle(0) == 0.0);
  CHECK(std::abs(g.roll_angle(3) - deg2rad(135.0)) < 1e-15);
}

TEST_CASE("grid: rotations have (closing, height, approach) columns") {
  const OrientationGrid g;
  for (int i = 0; i < g.size(); ++i) {
    const Mat3& r = g.rotation(i);
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-12);
    CHECK((r.col(2) - g.axis(i / 4)).norm() < 1e-12);
  }
  // Two rolls 90 degrees apart on the same axis have orthogonal closing directions.
  CHECK(std::abs(g.rotation(g.encode(5, 0)).col(0).dot(g.rotation(g.encode(5, 2)).col(0))) < 1e-12);
}

TEST_CASE("grid: every hemisphere direction is within 20 degrees of an axis") {
  const OrientationGrid g;
  Rng rng(2);
  for (int i = 0; i < 20000; ++i) {
    Vec3 u = rng.unit_vector();
    if (u.z() < 0) u = -u;
    double best = kPi;
    for (int a = 0; a < 49; ++a) best = std::min(best, qdtest::angle_between(u, g.axis(a)));
    CHECK(best < deg2rad(20.0));
  }
}

TEST_CASE("grasp_pose: closing-region centroid at the sample") {
  const OrientationGrid g;
  const HandGeometry hand;
  Rng rng(3);
  const Mat3 g2w = random_rotation(rng);
  for (int i = 0; i < g.size(); ++i) {
    const Vec3 s(rng.uniform(), rng.uniform(), rng.uniform());
    const Pose p = grasp_pose(s, g, i, hand, g2w);
    CHECK((p.translation() - s).norm() < 1e-12);
    CHECK((p.rotation() - g2w * g.rotation(i)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(grasp_pose(Vec3::Zero(), g, 0, hand).translation().norm() < 1e-9);
}

TEST_CASE("hand_occupancy: finger spacing, axis alignment, empty middle") {
  const HandGeometry hand;
  const double ap = 0.06;
  const auto boxes = hand_occupancy(Pose::identity(), hand, ap);
  const double inner_gap = (boxes[0].frame.translation().x() - boxes[0].half_extents.x()) -
                           (boxes[1].frame.translation().x() + boxes[1].half_extents.x());
  CHECK(std::abs(inner_gap - ap) < 1e-15);
  for (const auto& b : boxes) CHECK(b.frame.rotation() == Mat3::Identity());
  for (const auto& b : boxes) CHECK_FALSE(b.contains_closed(Vec3::Zero()));
}

TEST_CASE("in_collision: examples") {
  const HandGeometry hand;
  CHECK_FALSE(in_collision(std::span<const Vec3>{}, Pose::identity(), hand, hand.max_aperture));
  const auto boxes = hand_occupancy(Pose::identity(), hand, hand.max_aperture);
  for (const auto& b : boxes) {
    const std::vector<Vec3> one{b.frame.translation()};
    CHECK(in_collision(one, Pose::identity(), hand, hand.max_aperture));
  }
  // 4 cm cube centered between the fingers, approached face-on.
  Rng rng(4);
  const PointCloud cube = sample_surface(make_box(0.04, 0.04, 0.04), rng, 20000);
  // Shifted 1 mm so no face lies on the palm plane.
  const Pose ahead = Pose::from_translation(Vec3(0, 0, -0.001));
  CHECK_FALSE(qdtest::brute_collision(cube.points, ahead, hand, hand.max_aperture));
  CHECK_FALSE(in_collision(cube, ahead, hand, hand.max_aperture));
}

TEST_CASE("in_collision: agrees with brute force, indexed or not, and is monotone") {
  const HandGeometry hand;
  Rng rng(5);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.emplace_back(rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08), rng.uniform(-0.08, 0.08));
  const SpatialIndex index(pts);
  for (int trial = 0; trial < 500; ++trial) {
    const Pose p = qdtest::random_pose_near(rng, Vec3::Zero(), 0.05);
    const double ap = rng.uniform(0.03, hand.max_aperture);
    const bool brute = qdtest::brute_collision(pts, p, hand, ap);
    CHECK(in_collision(pts, p, hand, ap) == brute);
    CHECK(in_collision(index, p, hand, ap) == brute);
    if (brute) {
      std::vector<Vec3> more = pts;
      more.emplace_back(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
      CHECK(in_collision(more, p, hand, ap));
    }
  }
}

TEST_CASE("closing_region_points: examples and brute-force agreement") {
  const HandGeometry hand;
  const std::vector<Vec3> center{Vec3::Zero()};
  CHECK(closing_region_points(center, Pose::identity(), hand, hand.max_aperture).size() == 1);
  const std::vector<Vec3> beyond{Vec3(0, 0, 0.5 * hand.finger_length + 1e-6)};
  CHECK(closing_region_points(beyond, Pose::identity(), hand, hand.max_aperture).empty());
  Rng rng(6);
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.emplace_back(rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06), rng.uniform(-0.06, 0.06));
  for (int trial = 0; trial < 50; ++trial) {
    const Pose p = qdtest::random_pose_near(rng, Vec3::Zero(), 0.02);
    CHECK(closing_region_points(pts, p, hand, hand.max_aperture) ==
          qdtest::brute_closing_region(pts, p, hand, hand.max_aperture));
  }
}

TEST_CASE("push_forward: empty input and bad step") {
  const HandGeometry hand;
  CHECK_FALSE(push_forward(std::span<const Vec3>{}, Pose::identity(), hand).has_value());
  const std::vector<Vec3> far{Vec3(1, 1, 1)};
  CHECK_FALSE(push_forward(far, Pose::identity(), hand).has_value());
  CHECK_THROWS_AS(push_forward(far, Pose::identity(), hand, 0.0), InvalidArgument);
}

TEST_CASE("push_forward: plate narrower than the aperture stops at the palm") {
  const HandGeometry hand;
  const double step = 0.002;
  const auto wall = plate(0.0, 0.02, 0.002);  // perpendicular to the approach axis
  const Pose start = Pose::from_translation(Vec3(0, 0, -0.1));
  const auto res = push_forward(wall, start, hand, step);
  REQUIRE(res.has_value());
  CHECK_FALSE(qdtest::brute_collision(wall, *res, hand, hand.max_aperture));
  CHECK(qdtest::brute_collision(wall, res->translated(Vec3(0, 0, step)), hand, hand.max_aperture));
  // Wall z in the hand frame minus the palm plane at -L/2.
  const double palm_gap = -res->translation().z() + 0.5 * hand.finger_length;
  CHECK(palm_gap >= -1e-12);
  CHECK(palm_gap < step);
}

TEST_CASE("push_forward: results are collision-free, nonempty and maximal") {
  const HandGeometry hand;
  Rng rng(7);
  const PointCloud obj = render_depth(scale_to_extents(make_cylinder(0.02, 0.05), rng, 0.05, 0.05),
                                      look_at(Vec3(0.3, 0.2, 0.35), Vec3::Zero()), CameraIntrinsics::default_intrinsics());
  int found = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Pose p = qdtest::random_pose_near(rng, Vec3::Zero(), 0.02);
    const auto res = push_forward(obj, p, hand);
    if (!res) continue;
    ++found;
    CHECK((res->rotation() - p.rotation()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs((res->translation() - p.translation()).dot(p.rotation().col(0))) < 1e-12);
    CHECK_FALSE(qdtest::brute_collision(obj.points, *res, hand, hand.max_aperture));
    CHECK_FALSE(qdtest::brute_closing_region(obj.points, *res, hand, hand.max_aperture).empty());
    const Pose next = res->translated(kDefaultPushStep * res->rotation().col(2));
    CHECK((qdtest::brute_collision(obj.points, next, hand, hand.max_aperture) ||
           qdtest::brute_closing_region(obj.points, next, hand, hand.max_aperture).empty()));
  }
  CHECK(found > 50);
}

TEST_CASE("center_laterally: examples") {
  const HandGeometry hand;
  const Pose id = Pose::identity();
  CHECK(center_laterally(std::span<const Vec3>{}, id, hand).translation() == Vec3::Zero());
  const std::vector<Vec3> pair{Vec3(-0.01, 0, 0), Vec3(0.01, 0, 0)};
  CHECK(center_laterally(pair, id, hand).translation().norm() < 1e-15);
  const std::vector<Vec3> shifted{Vec3(-0.005, 0, 0), Vec3(0.015, 0, 0)};
  CHECK((center_laterally(shifted, id, hand).translation() - Vec3(0.005, 0, 0)).norm() < 1e-15);
}

TEST_CASE("refine_grasp: advances only when the palm is far from the points") {
  const HandGeometry hand;
  // Points near the fingertips: the palm gap exceeds half the finger length.
  const auto far_wall = plate(0.015, 0.01, 0.002);
  const RefinedGrasp r = refine_grasp(far_wall, Pose::identity(), hand);
  CHECK(r.forward_shift > 0.0);
  CHECK_FALSE(qdtest::brute_collision(far_wall, r.pose, hand, hand.max_aperture));
  // Points near the palm: no advance.
  const auto near_wall = plate(-0.015, 0.01, 0.002);
  CHECK(refine_grasp(near_wall, Pose::identity(), hand).forward_shift == 0.0);
}

TEST_CASE("required_aperture: width between outermost region points") {
  const HandGeometry hand;
  const std::vector<Vec3> pts{Vec3(-0.01, 0, 0), Vec3(0.02, 0, 0), Vec3(0.3, 0, 0)};
  CHECK(std::abs(required_aperture(pts, Pose::identity(), hand) - 0.03) < 1e-15);
}

TEST_CASE("hand geometry validation") {
  HandGeometry h;
  CHECK_NOTHROW(h.validate());
  h.max_aperture = 0.015;
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
  h = HandGeometry{};
  h.base_depth = 0;
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
}
