#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "qd/pipeline/detector.hpp"

namespace qd {

struct ScoredLabel {
  double score = 0.0;
  bool label = false;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  bool operator==(const Confusion&) const = default;
};

// Undefined (nullopt) when the denominator is zero.
std::optional<double> precision(const Confusion& c);
std::optional<double> recall(const Confusion& c);

// Predictions are the detections with score > threshold.
Confusion confusion_at(std::span<const ScoredLabel> detections, double threshold);

struct PrPoint {
  double threshold = 0.0;
  Confusion counts;
  std::optional<double> precision;
  std::optional<double> recall;
};

struct DpsPoint {
  double threshold = 0.0;
  std::size_t predictions = 0;
  std::optional<double> precision;
  double dps = 0.0;  // predictions per second of end-to-end detection time
};

struct EvalReport {
  std::vector<PrPoint> pr;
  std::vector<DpsPoint> dps;
  std::size_t detections = 0;
  std::size_t positives = 0;
  // No labeled positives among the detections: recall is undefined everywhere.
  bool no_positives = false;
  double wall_time = 0.0;
  StageTimings timings;
  StageCounters counters;
};

// Sweeps `thresholds` (strictly increasing, else InvalidArgument). Recall is
// measured against the positives among the evaluated detections.
EvalReport evaluate(std::span<const ScoredLabel> detections, std::span<const double> thresholds, double wall_time);

// {0, 1/steps, ..., (steps - 1)/steps}.
std::vector<double> threshold_sweep(int steps = 20);

// Interpolated precision: at each point, the best precision reached at the
// same or higher recall. Points with undefined recall or precision are dropped;
// the result is ordered by increasing recall.
std::vector<PrPoint> interpolated_pr(std::span<const PrPoint> curve);

void write_pr_csv(const std::filesystem::path& path, const EvalReport& report);
void write_dps_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace qd
