#include "qd/pipeline/workflow.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "qd/error.hpp"
#include "qd/geom/io.hpp"

namespace qd {

Precision precision_from_string(std::string_view name) {
  if (name == "f32" || name == "float32") return Precision::Float32;
  if (name == "f64" || name == "float64") return Precision::Float64;
  throw InvalidArgument("unknown precision '" + std::string(name) + "'");
}

nn::NetworkSpec rot_network_spec(const RunConfig& cfg) {
  return nn::NetworkSpec::standard(3, cfg.grid.size(), cfg.widths.conv1, cfg.widths.conv2, cfg.widths.hidden,
                                   kImageSize, cfg.widths.kernel);
}

nn::NetworkSpec gc_network_spec(const RunConfig& cfg) {
  return nn::NetworkSpec::standard(4, 1, cfg.widths.conv1, cfg.widths.conv2, cfg.widths.hidden, kImageSize,
                                   cfg.widths.kernel);
}

namespace {

template <typename T>
TrainOutcome train_as(const nn::Dataset& data, const nn::NetworkSpec& spec, const nn::TrainConfig& train,
                      std::optional<GridParams> grid, const TrainHooks& hooks) {
  nn::Network<T> net(spec);
  nn::TrainOptions<T> opts;
  opts.initial_loss_samples = hooks.initial_loss_samples;
  opts.on_epoch = hooks.on_epoch;
  if (hooks.checkpoint)
    opts.checkpoint = [&](int epoch, const nn::Network<T>& n) { hooks.checkpoint(epoch, nn::to_model_file(n, grid)); };
  TrainOutcome out;
  out.result = nn::train(net, data, train, opts);
  out.model = nn::to_model_file(net, grid);
  return out;
}

}  // namespace

TrainOutcome train_network(const nn::Dataset& data, const nn::NetworkSpec& spec, const nn::TrainConfig& train,
                           Precision precision, std::optional<GridParams> grid, const TrainHooks& hooks) {
  if (precision == Precision::Float64) return train_as<double>(data, spec, train, grid, hooks);
  return train_as<float>(data, spec, train, grid, hooks);
}

double topk_positive_rate(const nn::ModelFile& rot, const RotDataset& data, int k) {
  if (data.size() == 0) throw EmptyDataset("no examples to score");
  const nn::Network<float> net = nn::make_network<float>(rot);
  const int m = data.target_size();
  if (net.spec().outputs() != m) throw ModelMismatch("network width does not match the labels");
  k = std::min(k, m);
  const int bs = 64;
  std::vector<float> in_buf(static_cast<std::size_t>(3) * kImageSize * kImageSize), tgt(static_cast<std::size_t>(m));
  std::size_t hits = 0, picks = 0;
  for (std::size_t b = 0; b < data.size(); b += bs) {
    const int n = static_cast<int>(std::min<std::size_t>(bs, data.size() - b));
    nn::Tensor<float> input(n, 3, kImageSize, kImageSize);
    for (int i = 0; i < n; ++i) {
      data.load(b + i, in_buf, tgt);
      std::copy(in_buf.begin(), in_buf.end(), input.item(i));
    }
    const nn::Tensor<float> out = net.predict(input);
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int i = 0; i < n; ++i) {
      const float* s = out.item(i);
      std::iota(idx.begin(), idx.end(), 0);
      std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                        [&](int a, int c) { return s[a] > s[c] || (s[a] == s[c] && a < c); });
      const LabelVector& labels = data.labels(b + i);
      for (int j = 0; j < k; ++j) hits += labels.get(static_cast<std::size_t>(idx[j])) ? 1 : 0;
      picks += static_cast<std::size_t>(k);
    }
  }
  return static_cast<double>(hits) / static_cast<double>(picks);
}

EvalRun run_detection_eval(const std::filesystem::path& dir, const Manifest& manifest, Split split,
                           const Detector& detector, DetectMode mode, std::uint64_t seed, std::size_t max_clouds) {
  EvalRun run;
  std::map<int, LabelSurface> surfaces;
  const Rng root(seed);
  const RunConfig& cfg = detector.config();
  for (const ViewRecord& v : manifest.views) {
    if (!in_split(manifest, v, split)) continue;
    if (max_clouds && run.clouds >= max_clouds) break;
    const PointCloud cloud = read_ply(dir / v.cloud_file);
    if (cloud.empty()) continue;
    auto it = surfaces.find(v.object_id);
    if (it == surfaces.end()) {
      const ObjectRecord& obj = manifest.object(v.object_id);
      it = surfaces
               .emplace(v.object_id, LabelSurface(object_surface(load_object_mesh(dir, obj), manifest.seed, obj.id,
                                                                 manifest.dense_surface_count)))
               .first;
    }
    Rng rng = root.child("detect").child(static_cast<std::uint64_t>(v.object_id) * 1000003u +
                                          static_cast<std::uint64_t>(v.view_index));
    Detection det = detector.detect(cloud, rng, mode);
    for (const GraspHypothesis& h : det.grasps)
      run.detections.push_back({h.score(), grasp_label(it->second, h.pose, cfg.hand, cfg.oracle)});
    run.detections_per_cloud.push_back(det.grasps.size());
    run.timings += det.timings;
    run.counters.cloud_points += det.counters.cloud_points;
    run.counters.samples += det.counters.samples;
    run.counters.rot_scored += det.counters.rot_scored;
    run.counters.candidates += det.counters.candidates;
    run.counters.descriptor_attempts += det.counters.descriptor_attempts;
    run.counters.push_failures += det.counters.push_failures;
    run.counters.empty_regions += det.counters.empty_regions;
    run.counters.gc_scored += det.counters.gc_scored;
    run.counters.returned += det.counters.returned;
    ++run.clouds;
  }
  return run;
}

}  // namespace qd
