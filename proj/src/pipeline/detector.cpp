#include "qd/pipeline/detector.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "qd/encode/grasp_descriptor.hpp"
#include "qd/error.hpp"
#include "qd/hand/hand.hpp"

namespace qd {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct Candidate {
  std::size_t sample = 0;
  int orientation = 0;
  float rot = 0.0f;
};

// Indices of the k largest scores, ties broken by lower index.
std::vector<int> top_k(std::span<const float> scores, int k) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min<int>(k, static_cast<int>(idx.size()));
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  });
  idx.resize(k);
  return idx;
}

bool better(const GraspHypothesis& a, const GraspHypothesis& b) {
  if (a.score() != b.score()) return a.score() > b.score();
  if (a.sample_index != b.sample_index) return a.sample_index < b.sample_index;
  return a.orientation_index < b.orientation_index;
}

}  // namespace

std::string_view to_string(DetectMode mode) {
  switch (mode) {
    case DetectMode::QD: return "qd";
    case DetectMode::QDGC: return "qd-gc";
    case DetectMode::QDROT: return "qd-rot";
  }
  return "?";
}

DetectMode detect_mode_from_string(std::string_view name) {
  if (name == "qd") return DetectMode::QD;
  if (name == "qd-gc") return DetectMode::QDGC;
  if (name == "qd-rot") return DetectMode::QDROT;
  throw InvalidArgument("unknown detection mode '" + std::string(name) + "'");
}

StageTimings& StageTimings::operator+=(const StageTimings& o) {
  preprocess += o.preprocess;
  sampling += o.sampling;
  rot += o.rot;
  proposals += o.proposals;
  geometry += o.geometry;
  descriptors += o.descriptors;
  gc += o.gc;
  total += o.total;
  return *this;
}

Pose cloud_camera(const PointCloud& cloud, const Vec3& target) { return look_at(cloud.viewpoint, target); }

double view_cube_size(std::span<const Vec3> points, double margin) {
  if (points.empty()) return 0.0;
  const auto m = as_matrix(points);
  const double edge = (m.rowwise().maxCoeff() - m.rowwise().minCoeff()).maxCoeff();
  return edge * (1.0 + margin);
}

std::vector<std::size_t> sample_indices(std::size_t cloud_size, std::size_t n, Rng& rng) {
  if (cloud_size == 0) throw EmptyCloud("cannot sample from an empty cloud");
  std::vector<std::size_t> out;
  if (cloud_size >= n) {
    std::vector<std::size_t> all(cloud_size);
    std::iota(all.begin(), all.end(), std::size_t{0});
    // Partial Fisher-Yates: the first n slots are a uniform n-subset.
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(cloud_size - i));
      std::swap(all[i], all[j]);
    }
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
  } else {
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<std::size_t>(rng.below(cloud_size)));
  }
  return out;
}

PreparedCloud prepare_cloud(const PointCloud& cloud, const RunConfig& cfg) {
  if (cloud.empty()) throw EmptyCloud("detection needs a nonempty cloud");
  PreparedCloud p;
  if (cfg.detector.roi) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (cfg.detector.roi->contains(cloud.points[i])) keep.push_back(i);
    if (keep.empty()) throw EmptyCloud("no points inside the region of interest");
    p.cloud = cloud.subset(keep);
  } else {
    p.cloud = cloud;
  }
  if (!p.cloud.has_normals()) p.cloud = estimate_normals(p.cloud, cfg.normals).cloud;

  const Vec3 centroid = p.cloud.centroid();
  p.camera = cloud_camera(p.cloud, centroid);
  const Eigen::Matrix3Xd cam = p.camera.rotation().transpose() *
                               (as_matrix(p.cloud.points).colwise() - p.camera.translation());
  p.camera_points.resize(p.cloud.size());
  for (std::size_t i = 0; i < p.cloud.size(); ++i) p.camera_points[i] = cam.col(static_cast<Eigen::Index>(i));

  const double res = cfg.detector.view_resolution;
  const double cube = std::max(view_cube_size(p.camera_points, cfg.detector.view_margin), res);
  p.views = orthographic_views(p.camera_points, p.camera.inverse_transform(centroid), cube, res);
  return p;
}

Image proposal_input(const PreparedCloud& prepared, const Vec3& sample) {
  return proposal_image(prepared.views, prepared.camera.inverse_transform(sample));
}

Detector::Detector(const nn::ModelFile& rot, std::optional<nn::ModelFile> gc, const RunConfig& cfg)
    : cfg_(cfg), rot_(nn::make_network<float>(rot)) {
  if (!rot.grid) throw ModelMismatch("proposal model carries no orientation grid");
  cfg_.grid = *rot.grid;
  grid_ = OrientationGrid(Vec3::UnitZ(), cfg_.grid);
  if (rot.spec.outputs() != grid_.size())
    throw ModelMismatch("proposal network width " + std::to_string(rot.spec.outputs()) + " != grid size " +
                        std::to_string(grid_.size()));
  if (rot.spec.in_channels != 3 || rot.spec.in_height != kImageSize || rot.spec.in_width != kImageSize)
    throw ModelMismatch("proposal network expects 3 x 60 x 60 input");
  if (gc) {
    if (gc->spec.outputs() != 1) throw ModelMismatch("classifier network must have one output");
    if (gc->spec.in_channels != 4 || gc->spec.in_height != gc->spec.in_width)
      throw ModelMismatch("classifier network expects a square 4-channel input");
    gc_.emplace(nn::make_network<float>(*gc));
  }
  cfg_.detector.validate(grid_.size());
}

std::vector<float> Detector::score_rot(const PreparedCloud& prepared, std::span<const Vec3> samples) const {
  const int m = grid_.size();
  const int bs = cfg_.detector.batch_size;
  std::vector<float> scores(samples.size() * static_cast<std::size_t>(m));
  for (std::size_t b = 0; b < samples.size(); b += bs) {
    const int n = static_cast<int>(std::min<std::size_t>(bs, samples.size() - b));
    nn::Tensor<float> input(n, 3, kImageSize, kImageSize);
    for (int i = 0; i < n; ++i) {
      Image img = proposal_input(prepared, samples[b + i]);
      std::copy(img.data.begin(), img.data.end(), input.item(i));
    }
    nn::Tensor<float> out = rot_.predict(input);
    std::copy(out.data.begin(), out.data.end(), scores.begin() + static_cast<std::ptrdiff_t>(b * m));
  }
  return scores;
}

std::vector<float> Detector::score_gc(const std::vector<Image>& descriptors) const {
  const auto& spec = gc_->spec();
  const int bs = cfg_.detector.batch_size;
  std::vector<float> scores(descriptors.size());
  for (std::size_t b = 0; b < descriptors.size(); b += bs) {
    const int n = static_cast<int>(std::min<std::size_t>(bs, descriptors.size() - b));
    nn::Tensor<float> input(n, spec.in_channels, spec.in_height, spec.in_width);
    for (int i = 0; i < n; ++i)
      std::copy(descriptors[b + i].data.begin(), descriptors[b + i].data.end(), input.item(i));
    nn::Tensor<float> out = gc_->predict(input);
    std::copy(out.data.begin(), out.data.end(), scores.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return scores;
}

Detection Detector::detect(const PointCloud& cloud, Rng& rng, DetectMode mode) const {
  if (mode != DetectMode::QDROT && !gc_) throw ModelMismatch("this mode needs a classifier model");
  const DetectorConfig& dc = cfg_.detector;
  const HandGeometry& hand = cfg_.hand;
  const int m = grid_.size();
  Detection det;
  Stopwatch total;

  Stopwatch sw;
  PreparedCloud prepared = prepare_cloud(cloud, cfg_);
  const PointCloud& pc = prepared.cloud;
  const Mat3 grid_to_world = prepared.camera.rotation();
  det.counters.cloud_points = pc.size();
  det.timings.preprocess = sw.seconds();

  sw = Stopwatch();
  Rng sample_rng = rng.child("samples");
  for (std::size_t i : sample_indices(pc.size(), static_cast<std::size_t>(dc.n_samples), sample_rng))
    det.samples.push_back(pc.points[i]);
  det.counters.samples = det.samples.size();
  det.timings.sampling = sw.seconds();

  std::vector<Candidate> candidates;
  std::vector<float> rot_scores;
  if (mode != DetectMode::QDGC) {
    sw = Stopwatch();
    rot_scores = score_rot(prepared, det.samples);
    det.counters.rot_scored = rot_scores.size();
    det.timings.rot = sw.seconds();

    sw = Stopwatch();
    for (std::size_t s = 0; s < det.samples.size(); ++s) {
      std::span<const float> row(rot_scores.data() + s * m, static_cast<std::size_t>(m));
      for (int o : top_k(row, dc.top_k_orientations)) candidates.push_back({s, o, row[o]});
    }
    det.counters.candidates = candidates.size();
    det.timings.proposals = sw.seconds();
  } else {
    for (std::size_t s = 0; s < det.samples.size(); ++s)
      for (int o = 0; o < m; ++o) candidates.push_back({s, o, 0.0f});
    det.counters.candidates = candidates.size();
  }

  auto make_pose = [&](const Candidate& c) { return grasp_pose(det.samples[c.sample], grid_, c.orientation, hand,
                                                               grid_to_world); };

  if (mode == DetectMode::QDROT) {
    sw = Stopwatch();
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.rot > b.rot; });
    for (const Candidate& c : candidates) {
      if (static_cast<int>(det.grasps.size()) >= dc.top_k_final) break;
      auto pushed = push_forward(pc, make_pose(c), hand, dc.push_step);
      if (!pushed) {
        ++det.counters.push_failures;
        continue;
      }
      GraspHypothesis h;
      h.sample_index = c.sample;
      h.orientation_index = c.orientation;
      h.pose = *pushed;
      h.score_rot = c.rot;
      det.grasps.push_back(h);
    }
    det.timings.geometry = sw.seconds();
  } else {
    if (mode == DetectMode::QD) {
      sw = Stopwatch();
      Rng sub_rng = rng.child("subsample");
      const std::size_t budget = std::min<std::size_t>(static_cast<std::size_t>(dc.descriptor_budget),
                                                       candidates.size());
      std::vector<std::size_t> pick(candidates.size());
      std::iota(pick.begin(), pick.end(), std::size_t{0});
      for (std::size_t i = 0; i < budget; ++i)
        std::swap(pick[i], pick[i + static_cast<std::size_t>(sub_rng.below(pick.size() - i))]);
      pick.resize(budget);
      std::sort(pick.begin(), pick.end());
      std::vector<Candidate> chosen;
      chosen.reserve(budget);
      for (std::size_t i : pick) chosen.push_back(candidates[i]);
      candidates.swap(chosen);
      det.timings.proposals += sw.seconds();
    }

    det.counters.descriptor_attempts = candidates.size();
    std::vector<GraspHypothesis> hyps;
    std::vector<Image> descriptors;
    const int desc_size = gc_->spec().in_height;
    for (const Candidate& c : candidates) {
      sw = Stopwatch();
      auto pushed = push_forward(pc, make_pose(c), hand, dc.push_step);
      if (!pushed) {
        ++det.counters.push_failures;
        det.timings.geometry += sw.seconds();
        continue;
      }
      RefinedGrasp refined = refine_grasp(pc.points, *pushed, hand, dc.push_step);
      det.timings.geometry += sw.seconds();

      sw = Stopwatch();
      GraspDescriptor d = grasp_descriptor(pc, refined.pose, hand, desc_size);
      det.timings.descriptors += sw.seconds();
      if (d.empty_region) {
        ++det.counters.empty_regions;
        continue;
      }
      GraspHypothesis h;
      h.sample_index = c.sample;
      h.orientation_index = c.orientation;
      h.pose = refined.pose;
      if (mode == DetectMode::QD) h.score_rot = c.rot;
      h.lateral_shift = refined.lateral_shift;
      h.forward_shift = refined.forward_shift;
      hyps.push_back(h);
      descriptors.push_back(std::move(d.image));
    }

    sw = Stopwatch();
    std::vector<float> gc_scores = score_gc(descriptors);
    for (std::size_t i = 0; i < hyps.size(); ++i) hyps[i].score_gc = gc_scores[i];
    det.counters.gc_scored = gc_scores.size();
    det.timings.gc = sw.seconds();
    det.grasps = std::move(hyps);
  }

  std::stable_sort(det.grasps.begin(), det.grasps.end(), better);
  if (static_cast<int>(det.grasps.size()) > dc.top_k_final) det.grasps.resize(static_cast<std::size_t>(dc.top_k_final));
  det.counters.returned = det.grasps.size();
  det.timings.total = total.seconds();
  return det;
}

}  // namespace qd
