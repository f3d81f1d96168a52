#include "qd/pipeline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qd/error.hpp"

namespace qd {

using nlohmann::json;

void DetectorConfig::validate(int grid_size) const {
  if (n_samples <= 0) throw InvalidArgument("n_samples must be positive");
  if (top_k_orientations <= 0 || top_k_orientations > grid_size)
    throw InvalidArgument("top_k_orientations must be in [1, grid size]");
  if (descriptor_budget <= 0 ||
      static_cast<long long>(descriptor_budget) > static_cast<long long>(n_samples) * top_k_orientations)
    throw InvalidArgument("descriptor_budget must be in [1, n_samples * top_k_orientations]");
  if (top_k_final <= 0) throw InvalidArgument("top_k_final must be positive");
  if (!(push_step > 0.0)) throw InvalidArgument("push_step must be positive");
  if (!(view_resolution > 0.0) || view_margin < 0.0) throw InvalidArgument("bad view parameters");
  if (!(cluster_pos_tol >= 0.0) || !(cluster_angle_tol_deg >= 0.0)) throw InvalidArgument("bad cluster tolerances");
  if (batch_size <= 0) throw InvalidArgument("batch_size must be positive");
}

void DatasetConfig::validate() const {
  if (objects <= 0 || views <= 0 || points_per_cloud <= 0) throw InvalidArgument("dataset counts must be positive");
  if (test_objects < 0 || test_objects >= objects) throw InvalidArgument("test_objects must be in [0, objects)");
  if (!(camera_radius > 0.0)) throw InvalidArgument("camera_radius must be positive");
  if (!(extent_lo > 0.0 && extent_lo <= extent_hi)) throw InvalidArgument("need 0 < extent_lo <= extent_hi");
  if (categories.empty()) throw InvalidArgument("dataset needs at least one category");
  if (dense_surface_count == 0) throw InvalidArgument("dense_surface_count must be positive");
  if (gc_pairs_per_point < 0) throw InvalidArgument("gc_pairs_per_point must be non-negative");
  intrinsics.validate();
}

void RunConfig::validate() const {
  hand.validate();
  if (grid.num_axes <= 0 || grid.num_rolls <= 0) throw InvalidArgument("grid sizes must be positive");
  oracle.validate();
  detector.validate(grid.size());
  dataset.validate();
  if (widths.conv1 <= 0 || widths.conv2 <= 0 || widths.hidden <= 0 || widths.kernel <= 0)
    throw InvalidArgument("network widths must be positive");
  train_rot.validate();
  train_gc.validate();
}

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidArgument("config: '" + name_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw InvalidArgument("config: unknown key '" + name_ + "." + it.key() + "'");
  }

  template <typename V>
  void read(const char* key, V& value) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      value = it->template get<V>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }
  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_train(const json& j, const std::string& name, nn::TrainConfig& t) {
  Section s(j, name);
  s.read("batch_size", t.batch_size);
  s.read("momentum", t.momentum);
  s.read("lr0", t.lr0);
  s.read("lr_decay", t.lr_decay);
  s.read("epochs", t.epochs);
  s.read("seed", t.seed);
}

json train_json(const nn::TrainConfig& t) {
  return {{"batch_size", t.batch_size}, {"momentum", t.momentum}, {"lr0", t.lr0},
          {"lr_decay", t.lr_decay},     {"epochs", t.epochs},     {"seed", t.seed}};
}

Vec3 read_vec3(const json& j, const std::string& name) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("config: '" + name + "' must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  {
    Section s(root, "config");
    s.read("seed", cfg.seed);
    if (const json* j = s.sub("hand")) {
      Section h(*j, "hand");
      h.read("finger_length", cfg.hand.finger_length);
      h.read("finger_thickness", cfg.hand.finger_thickness);
      h.read("hand_height", cfg.hand.hand_height);
      h.read("max_aperture", cfg.hand.max_aperture);
      h.read("base_depth", cfg.hand.base_depth);
    }
    if (const json* j = s.sub("grid")) {
      Section g(*j, "grid");
      g.read("num_axes", cfg.grid.num_axes);
      g.read("num_rolls", cfg.grid.num_rolls);
      g.read("cap_half_angle_deg", cfg.grid.cap_half_angle_deg);
      g.read("roll_step_deg", cfg.grid.roll_step_deg);
    }
    if (const json* j = s.sub("oracle")) {
      Section o(*j, "oracle");
      o.read("friction_coeff", cfg.oracle.friction_coeff);
      o.read("contact_distance", cfg.oracle.contact_distance);
      o.read("votes", cfg.oracle.votes);
      o.read("vote_threshold", cfg.oracle.vote_threshold);
      o.read("perturb_angle_deg", cfg.oracle.perturb_angle_deg);
      o.read("perturb_translation", cfg.oracle.perturb_translation);
    }
    if (const json* j = s.sub("normals")) {
      Section n(*j, "normals");
      n.read("k", cfg.normals.k);
      n.read("radius", cfg.normals.radius);
    }
    if (const json* j = s.sub("detector")) {
      Section d(*j, "detector");
      d.read("n_samples", cfg.detector.n_samples);
      d.read("top_k_orientations", cfg.detector.top_k_orientations);
      d.read("descriptor_budget", cfg.detector.descriptor_budget);
      d.read("top_k_final", cfg.detector.top_k_final);
      d.read("score_threshold", cfg.detector.score_threshold);
      d.read("cluster_pos_tol", cfg.detector.cluster_pos_tol);
      d.read("cluster_angle_tol_deg", cfg.detector.cluster_angle_tol_deg);
      d.read("push_step", cfg.detector.push_step);
      d.read("view_margin", cfg.detector.view_margin);
      d.read("view_resolution", cfg.detector.view_resolution);
      d.read("batch_size", cfg.detector.batch_size);
      if (const json* r = d.sub("roi")) {
        if (!r->is_null()) {
          Section roi(*r, "detector.roi");
          Aabb box;
          if (const json* lo = roi.sub("lo")) box.lo = read_vec3(*lo, "detector.roi.lo");
          if (const json* hi = roi.sub("hi")) box.hi = read_vec3(*hi, "detector.roi.hi");
          cfg.detector.roi = box;
        }
      }
    }
    if (const json* j = s.sub("selection")) {
      Section w(*j, "selection");
      w.read("height", cfg.selection.height);
      w.read("verticality", cfg.selection.verticality);
      w.read("aperture", cfg.selection.aperture);
    }
    if (const json* j = s.sub("dataset")) {
      Section d(*j, "dataset");
      d.read("objects", cfg.dataset.objects);
      d.read("views", cfg.dataset.views);
      d.read("points_per_cloud", cfg.dataset.points_per_cloud);
      d.read("test_objects", cfg.dataset.test_objects);
      d.read("camera_radius", cfg.dataset.camera_radius);
      d.read("extent_lo", cfg.dataset.extent_lo);
      d.read("extent_hi", cfg.dataset.extent_hi);
      d.read("dense_surface_count", cfg.dataset.dense_surface_count);
      d.read("gc_pairs_per_point", cfg.dataset.gc_pairs_per_point);
      if (const json* c = d.sub("categories")) {
        std::vector<std::string> names;
        try {
          names = c->get<std::vector<std::string>>();
        } catch (const json::exception& e) {
          throw InvalidArgument(std::string("config: dataset.categories: ") + e.what());
        }
        cfg.dataset.categories.clear();
        for (const auto& n : names) cfg.dataset.categories.push_back(primitive_from_string(n));
      }
      if (const json* c = d.sub("camera")) {
        Section cam(*c, "dataset.camera");
        int width = cfg.dataset.intrinsics.width, height = cfg.dataset.intrinsics.height;
        double hfov = 60.0;
        cam.read("width", width);
        cam.read("height", height);
        cam.read("hfov_deg", hfov);
        cfg.dataset.intrinsics = CameraIntrinsics::from_fov(width, height, hfov);
      }
    }
    if (const json* j = s.sub("network")) {
      Section n(*j, "network");
      n.read("conv1", cfg.widths.conv1);
      n.read("conv2", cfg.widths.conv2);
      n.read("hidden", cfg.widths.hidden);
      n.read("kernel", cfg.widths.kernel);
    }
    if (const json* j = s.sub("train")) {
      Section t(*j, "train");
      if (const json* r = t.sub("rot")) read_train(*r, "train.rot", cfg.train_rot);
      if (const json* g = t.sub("gc")) read_train(*g, "train.gc", cfg.train_gc);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json cats = json::array();
  for (PrimitiveKind k : cfg.dataset.categories) cats.push_back(std::string(to_string(k)));
  const double hfov = rad2deg(2.0 * std::atan(cfg.dataset.intrinsics.width / (2.0 * cfg.dataset.intrinsics.fx)));
  json detector = {{"n_samples", cfg.detector.n_samples},
                   {"top_k_orientations", cfg.detector.top_k_orientations},
                   {"descriptor_budget", cfg.detector.descriptor_budget},
                   {"top_k_final", cfg.detector.top_k_final},
                   {"score_threshold", cfg.detector.score_threshold},
                   {"cluster_pos_tol", cfg.detector.cluster_pos_tol},
                   {"cluster_angle_tol_deg", cfg.detector.cluster_angle_tol_deg},
                   {"push_step", cfg.detector.push_step},
                   {"view_margin", cfg.detector.view_margin},
                   {"view_resolution", cfg.detector.view_resolution},
                   {"batch_size", cfg.detector.batch_size}};
  if (cfg.detector.roi) {
    const Aabb& b = *cfg.detector.roi;
    detector["roi"] = {{"lo", {b.lo.x(), b.lo.y(), b.lo.z()}}, {"hi", {b.hi.x(), b.hi.y(), b.hi.z()}}};
  }
  json root = {
      {"seed", cfg.seed},
      {"hand",
       {{"finger_length", cfg.hand.finger_length},
        {"finger_thickness", cfg.hand.finger_thickness},
        {"hand_height", cfg.hand.hand_height},
        {"max_aperture", cfg.hand.max_aperture},
        {"base_depth", cfg.hand.base_depth}}},
      {"grid",
       {{"num_axes", cfg.grid.num_axes},
        {"num_rolls", cfg.grid.num_rolls},
        {"cap_half_angle_deg", cfg.grid.cap_half_angle_deg},
        {"roll_step_deg", cfg.grid.roll_step_deg}}},
      {"oracle",
       {{"friction_coeff", cfg.oracle.friction_coeff},
        {"contact_distance", cfg.oracle.contact_distance},
        {"votes", cfg.oracle.votes},
        {"vote_threshold", cfg.oracle.vote_threshold},
        {"perturb_angle_deg", cfg.oracle.perturb_angle_deg},
        {"perturb_translation", cfg.oracle.perturb_translation}}},
      {"normals", {{"k", cfg.normals.k}, {"radius", cfg.normals.radius}}},
      {"detector", detector},
      {"selection",
       {{"height", cfg.selection.height},
        {"verticality", cfg.selection.verticality},
        {"aperture", cfg.selection.aperture}}},
      {"dataset",
       {{"objects", cfg.dataset.objects},
        {"views", cfg.dataset.views},
        {"points_per_cloud", cfg.dataset.points_per_cloud},
        {"test_objects", cfg.dataset.test_objects},
        {"camera_radius", cfg.dataset.camera_radius},
        {"extent_lo", cfg.dataset.extent_lo},
        {"extent_hi", cfg.dataset.extent_hi},
        {"dense_surface_count", cfg.dataset.dense_surface_count},
        {"gc_pairs_per_point", cfg.dataset.gc_pairs_per_point},
        {"categories", cats},
        {"camera",
         {{"width", cfg.dataset.intrinsics.width}, {"height", cfg.dataset.intrinsics.height}, {"hfov_deg", hfov}}}}},
      {"network",
       {{"conv1", cfg.widths.conv1},
        {"conv2", cfg.widths.conv2},
        {"hidden", cfg.widths.hidden},
        {"kernel", cfg.widths.kernel}}},
      {"train", {{"rot", train_json(cfg.train_rot)}, {"gc", train_json(cfg.train_gc)}}}};
  return root.dump(2);
}

}  // namespace qd
