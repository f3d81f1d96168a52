#include "qd/pipeline/evaluate.hpp"

#include <algorithm>
#include <fstream>

#include "qd/error.hpp"
#include "qd/geom/io.hpp"

namespace qd {

std::optional<double> precision(const Confusion& c) {
  if (c.tp + c.fp == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

std::optional<double> recall(const Confusion& c) {
  if (c.tp + c.fn == 0) return std::nullopt;
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

Confusion confusion_at(std::span<const ScoredLabel> detections, double threshold) {
  Confusion c;
  for (const ScoredLabel& d : detections) {
    const bool predicted = d.score > threshold;
    if (predicted && d.label) ++c.tp;
    else if (predicted) ++c.fp;
    else if (d.label) ++c.fn;
    else ++c.tn;
  }
  return c;
}

EvalReport evaluate(std::span<const ScoredLabel> detections, std::span<const double> thresholds, double wall_time) {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1])) throw InvalidArgument("thresholds must be strictly increasing");
  if (!(wall_time > 0.0)) throw InvalidArgument("wall time must be positive");
  EvalReport r;
  r.detections = detections.size();
  r.wall_time = wall_time;
  for (const ScoredLabel& d : detections) r.positives += d.label ? 1 : 0;
  r.no_positives = r.positives == 0;
  for (double t : thresholds) {
    PrPoint p;
    p.threshold = t;
    p.counts = confusion_at(detections, t);
    p.precision = precision(p.counts);
    p.recall = recall(p.counts);
    r.pr.push_back(p);
    DpsPoint d;
    d.threshold = t;
    d.predictions = p.counts.tp + p.counts.fp;
    d.precision = p.precision;
    d.dps = static_cast<double>(d.predictions) / wall_time;
    r.dps.push_back(d);
  }
  return r;
}

std::vector<double> threshold_sweep(int steps) {
  if (steps <= 0) throw InvalidArgument("threshold sweep needs a positive step count");
  std::vector<double> t;
  for (int i = 0; i < steps; ++i) t.push_back(static_cast<double>(i) / steps);
  return t;
}

std::vector<PrPoint> interpolated_pr(std::span<const PrPoint> curve) {
  std::vector<PrPoint> pts;
  for (const PrPoint& p : curve)
    if (p.precision && p.recall) pts.push_back(p);
  std::stable_sort(pts.begin(), pts.end(), [](const PrPoint& a, const PrPoint& b) { return *a.recall < *b.recall; });
  double best = 0.0;
  for (std::size_t i = pts.size(); i-- > 0;) {
    best = std::max(best, *pts[i].precision);
    pts[i].precision = best;
  }
  return pts;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v, 9) : std::string("nan"); }

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_pr_csv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = open_csv(path);
  out << "threshold,precision,recall,tp,fp,fn,tn\n";
  for (const PrPoint& p : report.pr)
    out << format_double(p.threshold, 9) << ',' << opt(p.precision) << ',' << opt(p.recall) << ',' << p.counts.tp
        << ',' << p.counts.fp << ',' << p.counts.fn << ',' << p.counts.tn << '\n';
}

void write_dps_csv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = open_csv(path);
  out << "threshold,precision,dps,predictions\n";
  for (const DpsPoint& d : report.dps)
    out << format_double(d.threshold, 9) << ',' << opt(d.precision) << ',' << format_double(d.dps, 9) << ','
        << d.predictions << '\n';
}

}  // namespace qd
