#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "qd/encode/height_map.hpp"
#include "qd/geom/rng.hpp"
#include "qd/nn/model_file.hpp"
#include "qd/pipeline/config.hpp"

namespace qd {

struct GraspHypothesis {
  std::size_t sample_index = 0;
  int orientation_index = 0;
  Pose pose;
  std::optional<double> score_rot;
  std::optional<double> score_gc;
  std::optional<bool> label;
  double lateral_shift = 0.0;  // centering correction along the closing axis
  double forward_shift = 0.0;  // conditional push after centering
  bool empty_region = false;

  // GC score when present, else ROT score, else 0.
  double score() const { return score_gc.value_or(score_rot.value_or(0.0)); }
};

enum class DetectMode { QD, QDGC, QDROT };

std::string_view to_string(DetectMode mode);
DetectMode detect_mode_from_string(std::string_view name);

struct StageCounters {
  std::size_t cloud_points = 0;
  std::size_t samples = 0;
  std::size_t rot_scored = 0;          // orientations scored by the proposal network
  std::size_t candidates = 0;          // poses surviving the per-point top-k
  std::size_t descriptor_attempts = 0;  // poses handed to the descriptor stage
  std::size_t push_failures = 0;       // poses the push-forward could not place
  std::size_t empty_regions = 0;       // descriptors with an empty closing region
  std::size_t gc_scored = 0;
  std::size_t returned = 0;
};

// Wall-clock seconds per stage.
struct StageTimings {
  double preprocess = 0.0;  // crop, normals, camera frame, global views
  double sampling = 0.0;
  double rot = 0.0;
  double proposals = 0.0;  // top-k and subsampling
  double geometry = 0.0;   // push-forward and centering
  double descriptors = 0.0;
  double gc = 0.0;
  double total = 0.0;

  StageTimings& operator+=(const StageTimings& o);
};

struct Detection {
  std::vector<GraspHypothesis> grasps;  // best first
  std::vector<Vec3> samples;            // sampled points, cloud frame
  StageCounters counters;
  StageTimings timings;
};

// Camera pose for a cloud: optical axis from the viewpoint to `target`,
// image "up" from world +z (+x when looking along z).
Pose cloud_camera(const PointCloud& cloud, const Vec3& target);

// Bounding cube edge of `points` grown by `margin` (a fraction of the edge).
double view_cube_size(std::span<const Vec3> points, double margin);

// Samples `n` indices uniformly: without replacement when the cloud holds at
// least n points, with replacement otherwise.
std::vector<std::size_t> sample_indices(std::size_t cloud_size, std::size_t n, Rng& rng);

// Shared preprocessing of a cloud for both networks.
struct PreparedCloud {
  PointCloud cloud;         // cropped, with normals, cloud frame
  Pose camera;              // camera-to-cloud frame
  std::vector<Vec3> camera_points;
  OrthoViews views;
};

PreparedCloud prepare_cloud(const PointCloud& cloud, const RunConfig& cfg);

// ROT network input for one sample point (cloud frame).
Image proposal_input(const PreparedCloud& prepared, const Vec3& sample);

class Detector {
 public:
  // `gc` may be empty for QD:ROT-only use. Throws ModelMismatch when the
  // proposal network's width differs from its grid or inputs do not match.
  Detector(const nn::ModelFile& rot, std::optional<nn::ModelFile> gc, const RunConfig& cfg);

  Detection detect(const PointCloud& cloud, Rng& rng, DetectMode mode = DetectMode::QD) const;

  const OrientationGrid& grid() const { return grid_; }
  const RunConfig& config() const { return cfg_; }

 private:
  std::vector<float> score_rot(const PreparedCloud& prepared, std::span<const Vec3> samples) const;
  std::vector<float> score_gc(const std::vector<Image>& descriptors) const;

  RunConfig cfg_;
  OrientationGrid grid_;
  nn::Network<float> rot_;
  std::optional<nn::Network<float>> gc_;
};

}  // namespace qd
