// Command-line front end: dataset generation, training, detection,
// evaluation and throughput benchmarking.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qd/error.hpp"
#include "qd/geom/io.hpp"
#include "qd/pipeline/cluster.hpp"
#include "qd/pipeline/plot.hpp"
#include "qd/pipeline/select.hpp"
#include "qd/pipeline/workflow.hpp"

namespace fs = std::filesystem;
using namespace qd;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed) {
      cfg.seed = *seed;
      cfg.train_rot.seed = *seed;
      cfg.train_gc.seed = *seed;
    }
    cfg.validate();
    return cfg;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Random seed (overrides the config)");
}

std::string fmt(double v) { return format_double(v, 9); }

void write_grasps_csv(const fs::path& path, const std::vector<GraspHypothesis>& grasps) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "sample_index,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz,rot_score,gc_score\n";
  for (const GraspHypothesis& h : grasps) {
    out << h.sample_index;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << ',' << fmt(h.pose.rotation()(r, c));
    for (int i = 0; i < 3; ++i) out << ',' << fmt(h.pose.translation()(i));
    out << ',' << (h.score_rot ? fmt(*h.score_rot) : "nan") << ',' << (h.score_gc ? fmt(*h.score_gc) : "nan")
        << '\n';
  }
}

void write_ranked_csv(const fs::path& path, const std::vector<RankedGrasp>& ranked) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "rank,tier,score,heuristic,r00,r01,r02,r10,r11,r12,r20,r21,r22,tx,ty,tz\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const RankedGrasp& g = ranked[i];
    out << i << ',' << static_cast<int>(g.tier) << ',' << fmt(g.score) << ',' << fmt(g.heuristic);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out << ',' << fmt(g.pose.rotation()(r, c));
    for (int k = 0; k < 3; ++k) out << ',' << fmt(g.pose.translation()(k));
    out << '\n';
  }
}

int run_gen_data(const Common& common, const std::string& out_dir, std::optional<int> objects,
                 std::optional<int> views, std::optional<int> points, std::optional<int> test_objects) {
  RunConfig cfg = common.load();
  if (objects) cfg.dataset.objects = *objects;
  if (views) cfg.dataset.views = *views;
  if (points) cfg.dataset.points_per_cloud = *points;
  if (test_objects) cfg.dataset.test_objects = *test_objects;
  cfg.validate();
  const Manifest m = build_dataset(out_dir, cfg, [](const DatasetProgress& p) {
    std::fprintf(stderr, "\r[gen-data] view %zu/%zu", p.views_done, p.views_total);
    if (p.views_done == p.views_total) std::fprintf(stderr, "\n");
  });
  const DatasetStats st = dataset_stats(out_dir, m);
  std::cout << st.to_string();
  return 0;
}

int run_train(const Common& common, const std::string& net, const std::string& data_dir, const std::string& out,
              std::optional<int> epochs, const std::string& precision, const std::string& log_path,
              const std::string& split) {
  RunConfig cfg = common.load();
  nn::TrainConfig& tc = net == "rot" ? cfg.train_rot : cfg.train_gc;
  if (epochs) tc.epochs = *epochs;
  const Manifest m = read_manifest(fs::path(data_dir) / "manifest.txt");
  cfg.grid = m.grid;
  cfg.hand = m.hand;
  const Split sp = split_from_string(split);
  std::unique_ptr<nn::Dataset> data;
  nn::NetworkSpec spec;
  std::optional<GridParams> grid;
  if (net == "rot") {
    data = std::make_unique<RotDataset>(data_dir, m, sp, cfg);
    spec = rot_network_spec(cfg);
    grid = cfg.grid;
  } else {
    data = std::make_unique<GcDataset>(data_dir, m, sp, cfg);
    spec = gc_network_spec(cfg);
  }
  std::cerr << "[train] " << net << ": " << data->size() << " examples, " << spec.describe() << ", "
            << spec.parameter_count() << " parameters\n";
  TrainHooks hooks;
  hooks.on_epoch = [](const nn::EpochLog& e) {
    std::cerr << "[train] epoch " << e.epoch << " lr " << fmt(e.learning_rate) << " loss " << fmt(e.mean_loss)
              << '\n';
  };
  hooks.checkpoint = [&](int, const nn::ModelFile& model) { nn::save_model(out, model); };
  TrainOutcome result = train_network(*data, spec, tc, precision_from_string(precision), grid, hooks);
  nn::save_model(out, result.model);
  const std::string log = log_path.empty() ? out + ".log.csv" : log_path;
  nn::write_loss_log(log, result.result.epochs);
  std::cout << "initial_loss " << fmt(result.result.initial_loss) << '\n';
  if (!result.result.epochs.empty()) std::cout << "final_loss " << fmt(result.result.epochs.back().mean_loss) << '\n';
  std::cout << "model " << out << "\nloss_log " << log << '\n';
  return 0;
}

std::optional<nn::ModelFile> maybe_model(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return nn::load_model(path);
}

int run_detect(const Common& common, const std::string& cloud_path, const std::string& out, const std::string& rot,
               const std::string& gc, const std::string& mode_name, const std::string& ranked_path) {
  RunConfig cfg = common.load();
  const DetectMode mode = detect_mode_from_string(mode_name);
  Detector detector(nn::load_model(rot), maybe_model(gc), cfg);
  const PointCloud cloud = read_ply(cloud_path);
  Rng rng = Rng(cfg.seed).child("detect");
  const Detection det = detector.detect(cloud, rng, mode);
  write_grasps_csv(out, det.grasps);
  const auto& c = det.counters;
  std::cout << "grasps " << det.grasps.size() << "\nsamples " << c.samples << "\nrot_scored " << c.rot_scored
            << "\ndescriptor_attempts " << c.descriptor_attempts << "\ngc_scored " << c.gc_scored << "\nseconds "
            << fmt(det.timings.total) << '\n';
  if (!ranked_path.empty()) {
    std::vector<Pose> poses;
    for (const auto& h : det.grasps) poses.push_back(h.pose);
    const auto clusters = cluster_grasps(poses, cfg.detector.cluster_pos_tol, cfg.detector.cluster_angle_tol_deg);
    const PointCloud prepared = prepare_cloud(cloud, cfg).cloud;
    const auto ranked = select_grasps(det.grasps, clusters, prepared, cfg.hand, cfg.selection,
                                      cfg.detector.score_threshold);
    write_ranked_csv(ranked_path, ranked);
    std::cout << "clusters " << clusters.size() << "\nranked " << ranked.size() << '\n';
  }
  return 0;
}

int run_eval(const Common& common, const std::string& data_dir, const std::string& rot, const std::string& gc,
             const std::string& mode_name, const std::string& out_dir, bool svg, std::size_t max_clouds,
             const std::string& split, int steps) {
  RunConfig cfg = common.load();
  const DetectMode mode = detect_mode_from_string(mode_name);
  const Manifest m = read_manifest(fs::path(data_dir) / "manifest.txt");
  cfg.hand = m.hand;
  cfg.oracle = m.oracle;
  Detector detector(nn::load_model(rot), mode == DetectMode::QDROT ? maybe_model(gc) : nn::load_model(gc), cfg);
  const EvalRun run =
      run_detection_eval(data_dir, m, split_from_string(split), detector, mode, cfg.seed, max_clouds);
  if (run.clouds == 0) throw EmptyDataset("no clouds in the selected split");
  const auto thresholds = threshold_sweep(steps);
  EvalReport report = evaluate(run.detections, thresholds, run.timings.total);
  report.timings = run.timings;
  report.counters = run.counters;

  fs::create_directories(out_dir);
  const std::string tag(to_string(mode));
  const fs::path pr = fs::path(out_dir) / (tag + "_pr.csv");
  const fs::path dps = fs::path(out_dir) / (tag + "_dps.csv");
  write_pr_csv(pr, report);
  write_dps_csv(dps, report);
  if (svg) {
    PlotSeries pr_series{tag, {}}, dps_series{tag, {}};
    for (const PrPoint& p : interpolated_pr(report.pr)) pr_series.points.emplace_back(*p.recall, *p.precision);
    for (const DpsPoint& d : report.dps)
      if (d.precision) dps_series.points.emplace_back(d.dps, *d.precision);
    write_line_plot(fs::path(out_dir) / (tag + "_pr.svg"), {"Precision vs recall", "recall", "precision", 0, 1, 0, 1},
                    {pr_series});
    write_line_plot(fs::path(out_dir) / (tag + "_dps.svg"),
                    {"Precision vs detections per second", "detections / s", "precision", 0, 0, 0, 1}, {dps_series});
  }
  std::cout << "mode " << tag << "\nclouds " << run.clouds << "\ndetections " << report.detections
            << "\npositives " << report.positives << (report.no_positives ? " (recall undefined)" : "")
            << "\nwall_time " << fmt(report.wall_time) << "\ndescriptor_attempts "
            << run.counters.descriptor_attempts << "\nrot_scored " << run.counters.rot_scored << "\npr_csv "
            << pr.string() << "\ndps_csv " << dps.string() << '\n';
  return 0;
}

int run_bench(const Common& common, const std::string& cloud_path, const std::string& rot, const std::string& gc,
              const std::string& mode_name, int repeat) {
  RunConfig cfg = common.load();
  const DetectMode mode = detect_mode_from_string(mode_name);
  Detector detector(nn::load_model(rot), maybe_model(gc), cfg);
  const PointCloud cloud = read_ply(cloud_path);
  Rng root(cfg.seed);
  double total = 0.0;
  std::size_t predictions = 0;
  StageTimings stages;
  for (int r = 0; r < repeat; ++r) {
    Rng rng = root.child(static_cast<std::uint64_t>(r));
    const Detection det = detector.detect(cloud, rng, mode);
    total += det.timings.total;
    stages += det.timings;
    for (const auto& h : det.grasps) predictions += h.score() > cfg.detector.score_threshold ? 1 : 0;
  }
  std::cout << "mode " << to_string(mode) << "\nruns " << repeat << "\nseconds " << fmt(total) << "\npredictions "
            << predictions << "\ndps " << fmt(static_cast<double>(predictions) / total) << "\nrot_seconds "
            << fmt(stages.rot) << "\ngeometry_seconds " << fmt(stages.geometry) << "\ndescriptor_seconds "
            << fmt(stages.descriptors) << "\ngc_seconds " << fmt(stages.gc) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage 6-DOF grasp pose detection"};
  app.require_subcommand(1);

  Common common;
  add_common(&app, common);

  std::string out_dir;
  std::optional<int> objects, views, points, test_objects;
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic labeled dataset");
  add_common(gen, common);
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--objects", objects, "Number of objects");
  gen->add_option("--views", views, "Camera views per object");
  gen->add_option("--points", points, "Sampled points per cloud");
  gen->add_option("--test-objects", test_objects, "Objects held out for evaluation");

  std::string net, data_dir, model_out, precision = "f32", log_path, split = "train";
  std::optional<int> epochs;
  auto* train = app.add_subcommand("train", "Train the proposal (rot) or classifier (gc) network");
  add_common(train, common);
  train->add_option("--net", net, "Network")->required()->check(CLI::IsMember({"rot", "gc"}));
  train->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", model_out, "Weight file")->required();
  train->add_option("--epochs", epochs, "Epochs (overrides the config)");
  train->add_option("--precision", precision, "f32 or f64")->check(CLI::IsMember({"f32", "f64"}));
  train->add_option("--log", log_path, "Loss log CSV (default: <out>.log.csv)");
  train->add_option("--split", split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));

  std::string cloud_path, grasps_out, rot_model, gc_model, mode = "qd", ranked_out;
  auto* detect = app.add_subcommand("detect", "Detect grasps in a point cloud");
  add_common(detect, common);
  detect->add_option("--cloud", cloud_path, "Input PLY")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", grasps_out, "Grasp CSV")->required();
  detect->add_option("--rot", rot_model, "Proposal network weights")->required()->check(CLI::ExistingFile);
  detect->add_option("--gc", gc_model, "Classifier network weights")->check(CLI::ExistingFile);
  detect->add_option("--mode", mode, "qd, qd-gc or qd-rot")->check(CLI::IsMember({"qd", "qd-gc", "qd-rot"}));
  detect->add_option("--ranked", ranked_out, "Also write clustered, ranked candidates to this CSV");

  std::string eval_split = "test", eval_out = "eval";
  bool svg = false;
  std::size_t max_clouds = 0;
  int steps = 20;
  auto* eval = app.add_subcommand("eval", "Precision / recall / DPS evaluation on a dataset split");
  add_common(eval, common);
  eval->add_option("--mode", mode, "qd, qd-gc or qd-rot")->required()->check(CLI::IsMember({"qd", "qd-gc", "qd-rot"}));
  eval->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--rot", rot_model, "Proposal network weights")->required()->check(CLI::ExistingFile);
  eval->add_option("--gc", gc_model, "Classifier network weights")->check(CLI::ExistingFile);
  eval->add_option("--out-dir", eval_out, "Directory for CSV and SVG output");
  eval->add_option("--split", eval_split, "train, test or all")->check(CLI::IsMember({"train", "test", "all"}));
  eval->add_option("--max-clouds", max_clouds, "Evaluate at most this many clouds (0 = all)");
  eval->add_option("--steps", steps, "Threshold sweep steps over [0, 1)");
  eval->add_flag("--svg", svg, "Write SVG line plots");

  int repeat = 5;
  auto* bench = app.add_subcommand("bench", "Detection throughput on one cloud");
  add_common(bench, common);
  bench->add_option("--cloud", cloud_path, "Input PLY")->required()->check(CLI::ExistingFile);
  bench->add_option("--rot", rot_model, "Proposal network weights")->required()->check(CLI::ExistingFile);
  bench->add_option("--gc", gc_model, "Classifier network weights")->check(CLI::ExistingFile);
  bench->add_option("--mode", mode, "qd, qd-gc or qd-rot")->check(CLI::IsMember({"qd", "qd-gc", "qd-rot"}));
  bench->add_option("--repeat", repeat, "Detection runs")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen_data(common, out_dir, objects, views, points, test_objects);
    if (*train) return run_train(common, net, data_dir, model_out, epochs, precision, log_path, split);
    if (*detect) return run_detect(common, cloud_path, grasps_out, rot_model, gc_model, mode, ranked_out);
    if (*eval)
      return run_eval(common, data_dir, rot_model, gc_model, mode, eval_out, svg, max_clouds, eval_split, steps);
    if (*bench) return run_bench(common, cloud_path, rot_model, gc_model, mode, repeat);
  } catch (const qd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
