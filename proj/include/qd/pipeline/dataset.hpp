#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qd/pipeline/config.hpp"

namespace qd {

// Manifest: a line-oriented text file, one record per line, fields separated
// by single spaces, floats with 9 significant digits:
//
//   format 1
//   seed <u64>
//   hand <finger_length> <finger_thickness> <hand_height> <max_aperture> <base_depth>
//   grid <num_axes> <num_rolls> <cap_half_angle_deg> <roll_step_deg>
//   oracle <mu> <contact_distance> <votes> <vote_threshold> <perturb_angle_deg> <perturb_translation>
//   normals <k> <radius>
//   scaling max-extent <lo> <hi>
//   camera <width> <height> <fx> <fy> <cx> <cy> <radius>
//   points_per_cloud <n>
//   dense_surface_count <n>
//   object <id> <category> <scale> <train|test> <mesh file>
//   view <object id> <view index> <category> <scale> <R row-major x9> <t x3> <cloud file> <rot file> <gc file>
//
// Paths are relative to the manifest's directory. Clouds are ASCII PLY with
// estimated normals; meshes are OFF. ROT label files hold one line per
// sampled point: "<sample index> <x> <y> <z> <hex label vector>". GC label
// files hold "<sample index> <orientation> <0|1> <R x9> <t x3>" per pose.
struct ObjectRecord {
  int id = 0;
  PrimitiveKind category = PrimitiveKind::Box;
  double scale = 1.0;
  bool test = false;
  std::string mesh_file;
};

struct ViewRecord {
  int object_id = 0;
  int view_index = 0;
  PrimitiveKind category = PrimitiveKind::Box;
  double scale = 1.0;
  Pose camera;
  std::string cloud_file;
  std::string rot_file;
  std::string gc_file;
};

struct Manifest {
  std::uint64_t seed = 0;
  HandGeometry hand;
  GridParams grid;
  OracleConfig oracle;
  NormalParams normals;
  double extent_lo = 0.01;
  double extent_hi = 0.07;
  CameraIntrinsics intrinsics = CameraIntrinsics::default_intrinsics();
  double camera_radius = 0.5;
  int points_per_cloud = 100;
  std::size_t dense_surface_count = kDefaultDenseSurfaceCount;
  std::vector<ObjectRecord> objects;
  std::vector<ViewRecord> views;

  const ObjectRecord& object(int id) const;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

struct RotRecord {
  std::size_t sample_index = 0;
  Vec3 point = Vec3::Zero();
  LabelVector labels;
};

struct GcRecord {
  std::size_t sample_index = 0;
  int orientation = 0;
  bool label = false;
  Pose pose;
};

void write_rot_labels(const std::filesystem::path& path, const std::vector<RotRecord>& records);
std::vector<RotRecord> read_rot_labels(const std::filesystem::path& path, std::size_t grid_size);
void write_gc_labels(const std::filesystem::path& path, const std::vector<GcRecord>& records);
std::vector<GcRecord> read_gc_labels(const std::filesystem::path& path);

enum class Split { Train, Test, All };

Split split_from_string(std::string_view name);
bool in_split(const Manifest& manifest, const ViewRecord& view, Split split);

// Ground-truth mesh and its dense surface sample for one object. The surface
// is drawn from a stream keyed by (seed, object id), so it is reproducible
// from the manifest alone.
TriangleMesh load_object_mesh(const std::filesystem::path& dir, const ObjectRecord& object);
PointCloud object_surface(const TriangleMesh& mesh, std::uint64_t seed, int object_id, std::size_t count);

struct DatasetProgress {
  int object_id = 0;
  int view_index = 0;
  std::size_t views_done = 0;
  std::size_t views_total = 0;
};

// Generates meshes, rendered clouds, ROT label vectors and GC pose labels
// under `dir` and writes `dir`/manifest.txt. Objects cycle through the
// configured categories; the last `test_objects` objects form the test split.
Manifest build_dataset(const std::filesystem::path& dir, const RunConfig& cfg,
                       const std::function<void(const DatasetProgress&)>& progress = {});

struct DatasetStats {
  std::size_t objects = 0;
  std::size_t clouds = 0;
  std::size_t cloud_points = 0;
  std::size_t rot_records = 0;
  std::size_t rot_bits = 0;
  std::size_t rot_positive_bits = 0;
  std::size_t gc_records = 0;
  std::size_t gc_positive = 0;

  double rot_base_rate() const { return rot_bits ? static_cast<double>(rot_positive_bits) / rot_bits : 0.0; }
  std::string to_string() const;
};

DatasetStats dataset_stats(const std::filesystem::path& dir, const Manifest& manifest, Split split = Split::All);

}  // namespace qd
