#pragma once

#include <vector>

#include "qd/geom/pose.hpp"
#include "qd/geom/rng.hpp"

namespace qd {

// Camera poses with positions uniform on a sphere of `radius` about the
// origin, each looking at the origin (see look_at for the up convention).
std::vector<Pose> sample_sphere_viewpoints(Rng& rng, std::size_t count, double radius);

// Rotation by an angle uniform in [0, max_angle_deg] about a uniform random
// axis, and a translation with uniform direction and magnitude uniform in
// [0, max_translation].
Pose random_perturbation(Rng& rng, double max_angle_deg, double max_translation);

// Uniformly random rotation (Haar measure), used by tests and augmentation-free
// invariance checks.
Mat3 random_rotation(Rng& rng);

}  // namespace qd
