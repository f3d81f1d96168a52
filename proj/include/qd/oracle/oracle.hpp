#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qd/geom/rng.hpp"
#include "qd/hand/hand.hpp"
#include "qd/synth/scene.hpp"

namespace qd {

struct OracleConfig {
  double friction_coeff = 0.5;
  double contact_distance = 0.002;
  int votes = 5;
  int vote_threshold = 3;
  double perturb_angle_deg = 5.0;
  double perturb_translation = 0.003;

  void validate() const;
  // cos(atan(mu)): minimum cosine between a contact normal and the closing axis.
  double cone_cosine() const;
};

// Multi-hot vector over orientation indices.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::size_t size) : bits_(size, 0) {}

  std::size_t size() const { return bits_.size(); }
  bool get(std::size_t i) const { return bits_.at(i) != 0; }
  void set(std::size_t i, bool v) { bits_.at(i) = v ? 1 : 0; }
  std::size_t count() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  // Bit i is bit (i % 4) of hex digit i / 4, most significant bit first
  // within a digit; ceil(size / 4) lowercase digits.
  std::string to_hex() const;
  static LabelVector from_hex(const std::string& hex, std::size_t size);

  bool operator==(const LabelVector&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Dense surface reordered into a bounding-box tree, so label queries
// skip regions the hand cannot reach. Queries through it return exactly
// what the plain PointCloud overloads return.
class LabelSurface {
 public:
  // Bounding-box tree node over cloud()[begin, end); leaves have left < 0.
  struct Node {
    Vec3 center;
    Vec3 half_extents;
    std::size_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  explicit LabelSurface(const PointCloud& surface, std::size_t bucket_size = 16);

  const PointCloud& cloud() const { return cloud_; }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  PointCloud cloud_;
  std::vector<Node> nodes_;
};

// Antipodal test against a surface sample with exact normals.
//
// The fingers close on the outermost surface points inside the closing
// region (at max aperture); points within contact_distance of either closed
// finger are contact candidates. True iff the +x finger touches a point whose
// normal lies within atan(mu) of +x and the -x finger one within atan(mu) of -x.
bool antipodal(const PointCloud& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg);
bool antipodal(const LabelSurface& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg);

// Collision-free against the full surface AND antipodal.
bool grasp_label(const PointCloud& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg);
bool grasp_label(const LabelSurface& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg);
bool grasp_label(const SceneSample& scene, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg);

bool majority_vote(std::span<const bool> outcomes, int threshold);

// Evaluates the original pose and votes - 1 perturbed copies (perturbation
// rotates about the grasp center and translates in the world frame); true iff
// at least vote_threshold evaluations succeed.
bool robust_label(const std::function<bool(const Pose&)>& evaluate, const Pose& pose, const OracleConfig& cfg,
                  Rng& rng);
bool robust_label(const SceneSample& scene, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg,
                  Rng& rng);

// Perturbed pose: rotation about the grasp center, then translation.
Pose apply_perturbation(const Pose& pose, const Pose& perturbation);

// For every grid orientation: grasp pose at `sample`, push-forward against
// the observed cloud, then the ground-truth label (0 when push-forward fails).
LabelVector label_vector(const PointCloud& observed, const LabelSurface& surface, const Vec3& sample,
                         const OrientationGrid& grid, const Mat3& grid_to_world, const HandGeometry& hand,
                         const OracleConfig& cfg, double push_step = kDefaultPushStep);
LabelVector label_vector(const PointCloud& observed, const PointCloud& surface, const Vec3& sample,
                         const OrientationGrid& grid, const Mat3& grid_to_world, const HandGeometry& hand,
                         const OracleConfig& cfg, double push_step = kDefaultPushStep);
LabelVector label_vector(const SceneSample& scene, const Vec3& sample, const OrientationGrid& grid,
                         const Mat3& grid_to_world, const HandGeometry& hand, const OracleConfig& cfg);

}  // namespace qd
