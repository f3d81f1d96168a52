#include "qd/pipeline/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qd/error.hpp"
#include "qd/geom/io.hpp"
#include "qd/geom/sampling.hpp"
#include "qd/hand/hand.hpp"
#include "qd/pipeline/detector.hpp"

namespace qd {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestDigits = 9;

std::string f9(double v) { return format_double(v, kManifestDigits); }

std::string pose_fields(const Pose& p, int digits) {
  std::string s;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) s += format_double(p.rotation()(r, c), digits) + ' ';
  for (int i = 0; i < 3; ++i) s += format_double(p.translation()(i), digits) + (i < 2 ? " " : "");
  return s;
}

Pose read_pose(std::istream& in, const std::string& where) {
  Mat3 r;
  Vec3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) in >> r(i, j);
  for (int i = 0; i < 3; ++i) in >> t(i);
  if (!in) throw FormatError(where + ": bad pose");
  // Written with limited precision; snap back onto SO(3).
  return Pose(orthonormalize(r), t);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::string object_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "obj_%04d", id);
  return buf;
}

}  // namespace

const ObjectRecord& Manifest::object(int id) const {
  for (const ObjectRecord& o : objects)
    if (o.id == id) return o;
  throw FormatError("manifest has no object " + std::to_string(id));
}

void write_manifest(const fs::path& path, const Manifest& m) {
  auto out = open_out(path);
  out << "format 1\n";
  out << "seed " << m.seed << '\n';
  out << "hand " << f9(m.hand.finger_length) << ' ' << f9(m.hand.finger_thickness) << ' ' << f9(m.hand.hand_height)
      << ' ' << f9(m.hand.max_aperture) << ' ' << f9(m.hand.base_depth) << '\n';
  out << "grid " << m.grid.num_axes << ' ' << m.grid.num_rolls << ' ' << f9(m.grid.cap_half_angle_deg) << ' '
      << f9(m.grid.roll_step_deg) << '\n';
  out << "oracle " << f9(m.oracle.friction_coeff) << ' ' << f9(m.oracle.contact_distance) << ' ' << m.oracle.votes
      << ' ' << m.oracle.vote_threshold << ' ' << f9(m.oracle.perturb_angle_deg) << ' '
      << f9(m.oracle.perturb_translation) << '\n';
  out << "normals " << m.normals.k << ' ' << f9(m.normals.radius) << '\n';
  out << "scaling max-extent " << f9(m.extent_lo) << ' ' << f9(m.extent_hi) << '\n';
  out << "camera " << m.intrinsics.width << ' ' << m.intrinsics.height << ' ' << f9(m.intrinsics.fx) << ' '
      << f9(m.intrinsics.fy) << ' ' << f9(m.intrinsics.cx) << ' ' << f9(m.intrinsics.cy) << ' '
      << f9(m.camera_radius) << '\n';
  out << "points_per_cloud " << m.points_per_cloud << '\n';
  out << "dense_surface_count " << m.dense_surface_count << '\n';
  for (const ObjectRecord& o : m.objects)
    out << "object " << o.id << ' ' << to_string(o.category) << ' ' << f9(o.scale) << ' '
        << (o.test ? "test" : "train") << ' ' << o.mesh_file << '\n';
  for (const ViewRecord& v : m.views)
    out << "view " << v.object_id << ' ' << v.view_index << ' ' << to_string(v.category) << ' ' << f9(v.scale) << ' '
        << pose_fields(v.camera, kManifestDigits) << ' ' << v.cloud_file << ' ' << v.rot_file << ' ' << v.gc_file
        << '\n';
}

Manifest read_manifest(const fs::path& path) {
  auto in = open_in(path);
  Manifest m;
  std::string line;
  int lineno = 0;
  bool have_format = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (key == "format") {
      int v = 0;
      ls >> v;
      if (v != 1) throw FormatError(where + ": unsupported manifest format");
      have_format = true;
    } else if (key == "seed") {
      ls >> m.seed;
    } else if (key == "hand") {
      ls >> m.hand.finger_length >> m.hand.finger_thickness >> m.hand.hand_height >> m.hand.max_aperture >>
          m.hand.base_depth;
    } else if (key == "grid") {
      ls >> m.grid.num_axes >> m.grid.num_rolls >> m.grid.cap_half_angle_deg >> m.grid.roll_step_deg;
    } else if (key == "oracle") {
      ls >> m.oracle.friction_coeff >> m.oracle.contact_distance >> m.oracle.votes >> m.oracle.vote_threshold >>
          m.oracle.perturb_angle_deg >> m.oracle.perturb_translation;
    } else if (key == "normals") {
      ls >> m.normals.k >> m.normals.radius;
    } else if (key == "scaling") {
      std::string mode;
      ls >> mode >> m.extent_lo >> m.extent_hi;
      if (mode != "max-extent") throw FormatError(where + ": unknown scaling mode");
    } else if (key == "camera") {
      ls >> m.intrinsics.width >> m.intrinsics.height >> m.intrinsics.fx >> m.intrinsics.fy >> m.intrinsics.cx >>
          m.intrinsics.cy >> m.camera_radius;
    } else if (key == "points_per_cloud") {
      ls >> m.points_per_cloud;
    } else if (key == "dense_surface_count") {
      ls >> m.dense_surface_count;
    } else if (key == "object") {
      ObjectRecord o;
      std::string cat, split;
      ls >> o.id >> cat >> o.scale >> split >> o.mesh_file;
      if (!ls) throw FormatError(where + ": bad object record");
      o.category = primitive_from_string(cat);
      if (split != "train" && split != "test") throw FormatError(where + ": bad split");
      o.test = split == "test";
      m.objects.push_back(o);
    } else if (key == "view") {
      ViewRecord v;
      std::string cat;
      ls >> v.object_id >> v.view_index >> cat >> v.scale;
      if (!ls) throw FormatError(where + ": bad view record");
      v.category = primitive_from_string(cat);
      v.camera = read_pose(ls, where);
      ls >> v.cloud_file >> v.rot_file >> v.gc_file;
      if (!ls) throw FormatError(where + ": bad view record");
      m.views.push_back(v);
    } else {
      throw FormatError(where + ": unknown record '" + key + "'");
    }
    if (ls.fail()) throw FormatError(where + ": malformed '" + key + "' record");
  }
  if (!have_format) throw FormatError(path.string() + ": missing format line");
  return m;
}

void write_rot_labels(const fs::path& path, const std::vector<RotRecord>& records) {
  auto out = open_out(path);
  for (const RotRecord& r : records)
    out << r.sample_index << ' ' << format_double(r.point.x()) << ' ' << format_double(r.point.y()) << ' '
        << format_double(r.point.z()) << ' ' << r.labels.to_hex() << '\n';
}

std::vector<RotRecord> read_rot_labels(const fs::path& path, std::size_t grid_size) {
  auto in = open_in(path);
  std::vector<RotRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    RotRecord r;
    std::string hex;
    ls >> r.sample_index >> r.point.x() >> r.point.y() >> r.point.z() >> hex;
    if (!ls) throw FormatError(path.string() + ": bad label record");
    r.labels = LabelVector::from_hex(hex, grid_size);
    out.push_back(std::move(r));
  }
  return out;
}

void write_gc_labels(const fs::path& path, const std::vector<GcRecord>& records) {
  auto out = open_out(path);
  for (const GcRecord& r : records)
    out << r.sample_index << ' ' << r.orientation << ' ' << (r.label ? 1 : 0) << ' ' << pose_fields(r.pose, 17)
        << '\n';
}

std::vector<GcRecord> read_gc_labels(const fs::path& path) {
  auto in = open_in(path);
  std::vector<GcRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    GcRecord r;
    int label = 0;
    ls >> r.sample_index >> r.orientation >> label;
    if (!ls || (label != 0 && label != 1)) throw FormatError(path.string() + ": bad label record");
    r.label = label == 1;
    r.pose = read_pose(ls, path.string());
    out.push_back(r);
  }
  return out;
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  if (name == "all") return Split::All;
  throw InvalidArgument("unknown split '" + std::string(name) + "'");
}

bool in_split(const Manifest& manifest, const ViewRecord& view, Split split) {
  if (split == Split::All) return true;
  return manifest.object(view.object_id).test == (split == Split::Test);
}

TriangleMesh load_object_mesh(const fs::path& dir, const ObjectRecord& object) {
  return read_off(dir / object.mesh_file);
}

PointCloud object_surface(const TriangleMesh& mesh, std::uint64_t seed, int object_id, std::size_t count) {
  Rng rng = Rng(seed).child("surface").child(static_cast<std::uint64_t>(object_id));
  return sample_surface(mesh, rng, count);
}

Manifest build_dataset(const fs::path& dir, const RunConfig& cfg,
                       const std::function<void(const DatasetProgress&)>& progress) {
  cfg.validate();
  const DatasetConfig& dc = cfg.dataset;
  fs::create_directories(dir / "meshes");
  fs::create_directories(dir / "clouds");
  fs::create_directories(dir / "labels");

  Manifest m;
  m.seed = cfg.seed;
  m.hand = cfg.hand;
  m.grid = cfg.grid;
  m.oracle = cfg.oracle;
  m.normals = cfg.normals;
  m.extent_lo = dc.extent_lo;
  m.extent_hi = dc.extent_hi;
  m.intrinsics = dc.intrinsics;
  m.camera_radius = dc.camera_radius;
  m.points_per_cloud = dc.points_per_cloud;
  m.dense_surface_count = dc.dense_surface_count;

  const OrientationGrid grid(Vec3::UnitZ(), cfg.grid);
  const Rng root(cfg.seed);
  DatasetProgress prog;
  prog.views_total = static_cast<std::size_t>(dc.objects) * dc.views;

  for (int id = 0; id < dc.objects; ++id) {
    Rng obj_rng = root.child("object").child(static_cast<std::uint64_t>(id));
    ObjectRecord obj;
    obj.id = id;
    obj.category = dc.categories[static_cast<std::size_t>(id) % dc.categories.size()];
    obj.test = id >= dc.objects - dc.test_objects;
    PrimitiveSpec spec;
    spec.kind = obj.category;
    TriangleMesh raw = primitive_library(obj_rng, spec);
    TriangleMesh mesh = scale_to_extents(raw, obj_rng, dc.extent_lo, dc.extent_hi, &obj.scale);
    obj.mesh_file = "meshes/" + object_name(id) + ".off";
    write_off(dir / obj.mesh_file, mesh);
    m.objects.push_back(obj);

    const LabelSurface surface(object_surface(mesh, cfg.seed, id, dc.dense_surface_count));
    Rng view_rng = obj_rng.child("views");
    const std::vector<Pose> cameras = sample_sphere_viewpoints(view_rng, static_cast<std::size_t>(dc.views),
                                                               dc.camera_radius);
    for (int v = 0; v < dc.views; ++v) {
      const std::string stem = object_name(id) + "_view_" + std::to_string(v);
      ViewRecord rec;
      rec.object_id = id;
      rec.view_index = v;
      rec.category = obj.category;
      rec.scale = obj.scale;
      rec.camera = cameras[static_cast<std::size_t>(v)];
      rec.cloud_file = "clouds/" + stem + ".ply";
      rec.rot_file = "labels/" + stem + ".rot";
      rec.gc_file = "labels/" + stem + ".gc";

      PointCloud rendered = render_depth(mesh, rec.camera, dc.intrinsics);
      std::vector<RotRecord> rot;
      std::vector<GcRecord> gc;
      if (!rendered.empty()) {
        const PointCloud cloud = estimate_normals(rendered, cfg.normals).cloud;
        write_ply(dir / rec.cloud_file, cloud);
        const Mat3 grid_to_world = cloud_camera(cloud, cloud.centroid()).rotation();
        Rng pick_rng = obj_rng.child("view").child(static_cast<std::uint64_t>(v));
        Rng sample_rng = pick_rng.child("samples");
        Rng gc_rng = pick_rng.child("gc");
        const auto samples = sample_indices(cloud.size(), static_cast<std::size_t>(dc.points_per_cloud), sample_rng);
        for (std::size_t s = 0; s < samples.size(); ++s) {
          RotRecord r;
          r.sample_index = s;
          r.point = cloud.points[samples[s]];
          r.labels = label_vector(cloud, surface, r.point, grid, grid_to_world, cfg.hand, cfg.oracle,
                                  cfg.detector.push_step);
          // Classifier examples: refined poses drawn from the positive and
          // the negative orientations of this point.
          std::vector<int> pos, neg;
          for (int o = 0; o < grid.size(); ++o) (r.labels.get(static_cast<std::size_t>(o)) ? pos : neg).push_back(o);
          gc_rng.shuffle(std::span<int>(pos));
          gc_rng.shuffle(std::span<int>(neg));
          for (const std::vector<int>* group : {&pos, &neg}) {
            int taken = 0;
            for (int o : *group) {
              if (taken >= dc.gc_pairs_per_point) break;
              auto pushed = push_forward(cloud, grasp_pose(r.point, grid, o, cfg.hand, grid_to_world), cfg.hand,
                                         cfg.detector.push_step);
              if (!pushed) continue;
              RefinedGrasp refined = refine_grasp(cloud.points, *pushed, cfg.hand, cfg.detector.push_step);
              gc.push_back({s, o, grasp_label(surface, refined.pose, cfg.hand, cfg.oracle), refined.pose});
              ++taken;
            }
          }
          rot.push_back(std::move(r));
        }
      } else {
        write_ply(dir / rec.cloud_file, rendered);
      }
      write_rot_labels(dir / rec.rot_file, rot);
      write_gc_labels(dir / rec.gc_file, gc);
      m.views.push_back(rec);

      ++prog.views_done;
      prog.object_id = id;
      prog.view_index = v;
      if (progress) progress(prog);
    }
  }
  write_manifest(dir / "manifest.txt", m);
  return m;
}

std::string DatasetStats::to_string() const {
  std::ostringstream os;
  os << "objects " << objects << "\nclouds " << clouds << "\ncloud_points " << cloud_points << "\nrot_records "
     << rot_records << "\nrot_bits " << rot_bits << "\nrot_positive_bits " << rot_positive_bits << "\nrot_base_rate "
     << format_double(rot_base_rate(), 9) << "\ngc_records " << gc_records << "\ngc_positive " << gc_positive << '\n';
  return os.str();
}

DatasetStats dataset_stats(const fs::path& dir, const Manifest& manifest, Split split) {
  DatasetStats st;
  std::vector<int> seen;
  for (const ViewRecord& v : manifest.views) {
    if (!in_split(manifest, v, split)) continue;
    if (std::find(seen.begin(), seen.end(), v.object_id) == seen.end()) seen.push_back(v.object_id);
    ++st.clouds;
    st.cloud_points += read_ply(dir / v.cloud_file).size();
    for (const RotRecord& r : read_rot_labels(dir / v.rot_file, static_cast<std::size_t>(manifest.grid.size()))) {
      ++st.rot_records;
      st.rot_bits += r.labels.size();
      st.rot_positive_bits += r.labels.count();
    }
    for (const GcRecord& g : read_gc_labels(dir / v.gc_file)) {
      ++st.gc_records;
      st.gc_positive += g.label ? 1 : 0;
    }
  }
  st.objects = seen.size();
  return st;
}

}  // namespace qd
