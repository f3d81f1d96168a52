#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string_view>

#include "qd/nn/model_file.hpp"
#include "qd/pipeline/detector.hpp"
#include "qd/pipeline/evaluate.hpp"
#include "qd/pipeline/training_data.hpp"

namespace qd {

enum class Precision { Float32, Float64 };

Precision precision_from_string(std::string_view name);

nn::NetworkSpec rot_network_spec(const RunConfig& cfg);
nn::NetworkSpec gc_network_spec(const RunConfig& cfg);

struct TrainOutcome {
  nn::ModelFile model;
  nn::TrainResult result;
};

struct TrainHooks {
  std::function<void(const nn::EpochLog&)> on_epoch;
  // Receives the model after every epoch.
  std::function<void(int epoch, const nn::ModelFile&)> checkpoint;
  std::size_t initial_loss_samples = 0;
};

// Trains a freshly initialized network. Float64 keeps every computation in
// double precision; the saved weights are float32 either way.
TrainOutcome train_network(const nn::Dataset& data, const nn::NetworkSpec& spec, const nn::TrainConfig& train,
                           Precision precision, std::optional<GridParams> grid, const TrainHooks& hooks = {});

// Fraction of positive labels among each example's k best-scored orientations.
double topk_positive_rate(const nn::ModelFile& rot, const RotDataset& data, int k);

struct EvalRun {
  std::vector<ScoredLabel> detections;
  std::vector<std::size_t> detections_per_cloud;
  StageTimings timings;
  StageCounters counters;
  std::size_t clouds = 0;
};

// Runs the detector on every cloud of `split` (at most `max_clouds` when
// nonzero) and labels each returned grasp against the object's dense surface.
EvalRun run_detection_eval(const std::filesystem::path& dir, const Manifest& manifest, Split split,
                           const Detector& detector, DetectMode mode, std::uint64_t seed, std::size_t max_clouds = 0);

}  // namespace qd
