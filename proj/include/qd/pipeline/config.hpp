#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qd/encode/height_map.hpp"
#include "qd/geom/normals.hpp"
#include "qd/hand/hand_geometry.hpp"
#include "qd/hand/orientation_grid.hpp"
#include "qd/nn/train.hpp"
#include "qd/oracle/oracle.hpp"
#include "qd/synth/primitives.hpp"
#include "qd/synth/render.hpp"

namespace qd {

// Axis-aligned crop box in the cloud's frame.
struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
};

struct DetectorConfig {
  int n_samples = 500;
  int top_k_orientations = 20;
  int descriptor_budget = 300;
  int top_k_final = 150;
  double score_threshold = 0.5;
  double cluster_pos_tol = 0.01;
  double cluster_angle_tol_deg = 15.0;
  double push_step = kDefaultPushStep;
  // Global view cube: bounding cube of the region of interest grown by this fraction.
  double view_margin = 0.1;
  double view_resolution = kDefaultViewResolution;
  // Region of interest; the whole cloud when unset.
  std::optional<Aabb> roi;
  // Batch size of network forward passes.
  int batch_size = 64;

  void validate(int grid_size) const;
};

struct SelectionWeights {
  double height = 1.0;
  double verticality = 1.0;
  double aperture = -0.5;
};

struct DatasetConfig {
  int objects = 10;
  int views = 20;
  int points_per_cloud = 100;
  // Objects at the end of the object list reserved for evaluation.
  int test_objects = 0;
  double camera_radius = 0.5;
  double extent_lo = 0.01;
  double extent_hi = 0.07;
  std::vector<PrimitiveKind> categories{PrimitiveKind::Box, PrimitiveKind::Cylinder, PrimitiveKind::Sphere,
                                        PrimitiveKind::Bottle, PrimitiveKind::Mug};
  std::size_t dense_surface_count = kDefaultDenseSurfaceCount;
  CameraIntrinsics intrinsics = CameraIntrinsics::default_intrinsics();
  // Per sampled point: one positive and one negative pose for the classifier.
  int gc_pairs_per_point = 1;

  void validate() const;
};

// Conv and hidden widths shared by both networks.
struct NetworkWidths {
  int conv1 = 32;
  int conv2 = 64;
  int hidden = 256;
  int kernel = 5;
};

struct RunConfig {
  std::uint64_t seed = 0;
  HandGeometry hand;
  GridParams grid;
  OracleConfig oracle;
  NormalParams normals;
  DetectorConfig detector;
  SelectionWeights selection;
  DatasetConfig dataset;
  NetworkWidths widths;
  nn::TrainConfig train_rot;
  nn::TrainConfig train_gc;

  void validate() const;
};

// JSON config. Every key is optional and falls back to the defaults above;
// unknown keys throw InvalidArgument.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text);
std::string config_to_json(const RunConfig& cfg);

}  // namespace qd
