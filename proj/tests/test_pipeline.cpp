#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qd/error.hpp"
#include "qd/geom/sampling.hpp"
#include "qd/hand/hand.hpp"
#include "qd/pipeline/cluster.hpp"
#include "qd/pipeline/config.hpp"
#include "qd/pipeline/dataset.hpp"
#include "qd/pipeline/detector.hpp"
#include "qd/pipeline/evaluate.hpp"
#include "qd/pipeline/plot.hpp"
#include "qd/pipeline/select.hpp"
#include "qd/pipeline/workflow.hpp"
#include "qd/synth/primitives.hpp"
#include "qd/synth/scene.hpp"
#include "support/metric_table.hpp"

using namespace qd;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.widths = {2, 2, 4, 5};
  cfg.detector.n_samples = 30;
  cfg.detector.descriptor_budget = 60;
  cfg.detector.top_k_final = 40;
  return cfg;
}

struct Models {
  nn::ModelFile rot;
  nn::ModelFile gc;
};

Models random_models(const RunConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  nn::Network<float> rot(rot_network_spec(cfg)), gc(gc_network_spec(cfg));
  rot.init(rng);
  gc.init(rng);
  return {nn::to_model_file(rot, cfg.grid), nn::to_model_file(gc)};
}

PointCloud box_cloud(std::uint64_t seed) {
  Rng rng(seed);
  return make_scene(make_box(0.04, 0.05, 0.06), look_at(Vec3(0.2, 0.25, 0.35), Vec3::Zero()),
                    CameraIntrinsics::default_intrinsics(), rng, 2000)
      .cloud;
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("qd_test_pipeline_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("cluster: identical poses, distant poses, a line of poses") {
  const Pose p(Mat3::Identity(), Vec3(0.1, 0.2, 0.3));
  const std::vector<Pose> same(4, p);
  const auto one = cluster_grasps(same, 0.01, 15.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].members.size() == 4);
  CHECK(one[0].center.translation() == p.translation());
  CHECK(one[0].center.rotation() == p.rotation());

  const std::vector<Pose> apart{Pose::identity(), Pose::from_translation(Vec3(1, 0, 0))};
  CHECK(cluster_grasps(apart, 0.01, 15.0).size() == 2);

  std::vector<Pose> line;
  Vec3 mean = Vec3::Zero();
  for (int i = 0; i < 5; ++i) {
    line.push_back(Pose::from_translation(Vec3(0.004 * i, 0, 0)));
    mean += line.back().translation();
  }
  mean /= 5.0;
  const auto c = cluster_grasps(line, 0.005, 15.0);
  REQUIRE(c.size() == 1);
  CHECK((c[0].center.translation() - mean).norm() < 1e-9);
}

TEST_CASE("cluster: alignment tests each axis and treats the closing axis modulo 180 degrees") {
  const Pose a = Pose::identity();
  CHECK(grasps_aligned(a, Pose::from_axis_angle(Vec3::UnitZ(), deg2rad(180.0)), 0.01, 15.0));
  CHECK_FALSE(grasps_aligned(a, Pose::from_axis_angle(Vec3::UnitZ(), deg2rad(90.0)), 0.01, 15.0));
  CHECK_FALSE(grasps_aligned(a, Pose::from_axis_angle(Vec3::UnitX(), deg2rad(20.0)), 0.01, 15.0));
  CHECK(grasps_aligned(a, Pose::from_axis_angle(Vec3::UnitX(), deg2rad(10.0)), 0.01, 15.0));
  CHECK_FALSE(grasps_aligned(a, Pose::from_translation(Vec3(0.011, 0, 0)), 0.01, 15.0));
}

TEST_CASE("cluster: components are the connected sets of aligned grasps") {
  Rng rng(1);
  std::vector<Pose> poses;
  for (int i = 0; i < 60; ++i)
    poses.push_back(Pose::from_axis_angle(Vec3::UnitZ(), rng.uniform(0, 0.5)).with_translation(
        Vec3(rng.uniform(0, 0.05), rng.uniform(0, 0.05), 0)));
  const auto clusters = cluster_grasps(poses, 0.01, 15.0);
  std::vector<int> label(poses.size(), -1);
  std::size_t total = 0;
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (std::size_t i : clusters[c].members) {
      label[i] = static_cast<int>(c);
      ++total;
    }
  CHECK(total == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    for (std::size_t j = i + 1; j < poses.size(); ++j)
      if (grasps_aligned(poses[i], poses[j], 0.01, 15.0)) CHECK(label[i] == label[j]);
}

TEST_CASE("select: tier order, verticality and the collision filter") {
  const HandGeometry hand;
  PointCloud cloud;
  cloud.points = {Vec3(5, 5, 5)};
  // Hypotheses above the cloud, approach pointing down (-z) for index 0 and 2.
  const Mat3 down = Pose::from_axis_angle(Vec3::UnitX(), deg2rad(180.0)).rotation();
  const Mat3 tilted = Pose::from_axis_angle(Vec3::UnitX(), deg2rad(120.0)).rotation();
  std::vector<GraspHypothesis> hyps(5);
  hyps[0].pose = Pose(down, Vec3(0, 0, 0.1));
  hyps[0].score_gc = 0.2;
  hyps[1].pose = Pose(tilted, Vec3(0, 0, 0.1));
  hyps[1].score_gc = 0.2;
  hyps[2].pose = Pose(down, Vec3(1, 0, 0.1));
  hyps[2].score_gc = 0.9;
  hyps[3].pose = Pose(down, Vec3(2, 0, 0.1));
  hyps[3].score_gc = 0.7;
  hyps[4].pose = Pose(down, Vec3(2.001, 0, 0.1));
  hyps[4].score_gc = 0.6;
  const GraspCluster cl{{3, 4}, 3, Pose(down, Vec3(2.0005, 0, 0.1))};
  const std::vector<GraspCluster> clusters{cl};
  const auto ranked = select_grasps(hyps, clusters, cloud, hand, SelectionWeights{});
  REQUIRE(ranked.size() == 6);
  CHECK(ranked[0].tier == SelectionTier::ClusterCenter);
  CHECK(ranked[0].score == doctest::Approx(0.65));
  CHECK(ranked[1].tier == SelectionTier::ClusterMember);
  CHECK(ranked[2].tier == SelectionTier::ClusterMember);
  CHECK(ranked[3].tier == SelectionTier::AboveThreshold);
  CHECK(ranked[3].hypothesis == 2u);
  CHECK(ranked[4].hypothesis == 0u);  // more vertical of the two low scorers
  CHECK(ranked[5].hypothesis == 1u);
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].tier <= ranked[i].tier);

  // A point inside the fingers of the cluster center removes it.
  PointCloud blocking;
  blocking.points = {cl.center.transform(Vec3(hand.max_aperture / 2 + hand.finger_thickness / 2, 0, 0))};
  const auto filtered = select_grasps(hyps, clusters, blocking, hand, SelectionWeights{});
  for (const RankedGrasp& r : filtered) CHECK(r.tier != SelectionTier::ClusterCenter);
}

TEST_CASE("evaluate: criterion table of confusion counts") {
  const std::vector<double> t{0.5};
  for (const auto& row : qdtest::confusion_table()) {
    const auto d = qdtest::detections_for(row);
    const EvalReport r = evaluate(d, t, 1.0);
    REQUIRE(r.pr.size() == 1);
    CHECK(r.pr[0].counts == Confusion{row.tp, row.fp, row.fn, row.tn});
    CHECK(r.pr[0].precision == row.precision);
    CHECK(r.pr[0].recall == row.recall);
    CHECK(r.no_positives == (row.tp + row.fn == 0));
  }
}

TEST_CASE("evaluate: threshold sweep, DPS and undefined precision") {
  const auto d = qdtest::sweep_detections();
  std::vector<double> t;
  for (const auto& p : qdtest::sweep_table()) t.push_back(p.threshold);
  const EvalReport r = evaluate(d, t, 0.5);
  REQUIRE(r.pr.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& e = qdtest::sweep_table()[i];
    CHECK(r.pr[i].counts == e.counts);
    CHECK(r.pr[i].precision == e.precision);
    CHECK(r.pr[i].recall == e.recall);
    CHECK(r.dps[i].predictions == e.predictions);
    CHECK(r.dps[i].dps == static_cast<double>(e.predictions) / 0.5);
  }
  std::vector<ScoredLabel> hundred(100, {0.9, true});
  const std::vector<double> half{0.5};
  CHECK(evaluate(hundred, half, 2.0).dps[0].dps == 50.0);
  const std::vector<double> bad{0.5, 0.5};
  CHECK_THROWS_AS(evaluate(d, bad, 1.0), InvalidArgument);
  const auto sweep = threshold_sweep(4);
  CHECK(sweep == std::vector<double>{0.0, 0.25, 0.5, 0.75});
}

TEST_CASE("evaluate: interpolated precision never rises with recall") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ScoredLabel> d;
    for (int i = 0; i < 200; ++i) {
      const double s = rng.uniform();
      d.push_back({s, rng.uniform() < s});
    }
    const auto t = threshold_sweep(50);
    const EvalReport r = evaluate(d, t, 1.0);
    for (const PrPoint& p : r.pr) {
      if (p.precision) CHECK((*p.precision >= 0.0 && *p.precision <= 1.0));
      if (p.recall) CHECK((*p.recall >= 0.0 && *p.recall <= 1.0));
    }
    const auto ip = interpolated_pr(r.pr);
    for (std::size_t i = 1; i < ip.size(); ++i) {
      CHECK(*ip[i].recall >= *ip[i - 1].recall);
      CHECK(*ip[i].precision <= *ip[i - 1].precision);
    }
  }
}

TEST_CASE("evaluate: CSV output") {
  const auto dir = fresh_dir("csv");
  std::filesystem::create_directories(dir);
  const auto d = qdtest::sweep_detections();
  const std::vector<double> t{0.0, 0.95};
  const EvalReport r = evaluate(d, t, 2.0);
  write_pr_csv(dir / "pr.csv", r);
  write_dps_csv(dir / "dps.csv", r);
  std::istringstream pr(read_file(dir / "pr.csv"));
  std::string line;
  std::getline(pr, line);
  CHECK(line == "threshold,precision,recall,tp,fp,fn,tn");
  std::getline(pr, line);
  CHECK(line == "0,0.5,1,4,4,0,0");
  std::getline(pr, line);
  CHECK(line == "0.95,nan,0,0,0,4,4");
  std::istringstream dps(read_file(dir / "dps.csv"));
  std::getline(dps, line);
  CHECK(line == "threshold,precision,dps,predictions");
  std::getline(dps, line);
  CHECK(line == "0,0.5,4,8");
  std::filesystem::remove_all(dir);
}

TEST_CASE("plot: SVG has one polyline per series") {
  PlotSpec spec{"PR", "recall", "precision"};
  const std::string svg = line_plot_svg(spec, {{"a", {{0, 1}, {1, 0.5}}}, {"b", {{0, 0.8}, {0.5, 0.6}}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t paths = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++paths;
  CHECK(paths == 2);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("config: defaults, overrides and unknown keys") {
  const RunConfig d = parse_config("{}");
  CHECK(d.detector.n_samples == 500);
  CHECK(d.detector.top_k_orientations == 20);
  CHECK(d.detector.descriptor_budget == 300);
  CHECK(d.detector.top_k_final == 150);
  CHECK(d.train_rot.batch_size == 64);
  CHECK(d.train_rot.lr0 == 0.01);
  CHECK(d.grid.size() == 196);
  const RunConfig o = parse_config(R"({"seed": 5, "detector": {"n_samples": 10, "descriptor_budget": 20},
                                       "network": {"hidden": 16}, "train": {"gc": {"epochs": 3}}})");
  CHECK(o.seed == 5u);
  CHECK(o.detector.n_samples == 10);
  CHECK(o.widths.hidden == 16);
  CHECK(o.train_gc.epochs == 3);
  CHECK_THROWS_AS(parse_config(R"({"detector": {"samples": 10}})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"nonsense": 1})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"detector": {"descriptor_budget": 100000}})"), InvalidArgument);
  const RunConfig again = parse_config(config_to_json(o));
  CHECK(config_to_json(again) == config_to_json(o));
}

TEST_CASE("dataset: record arithmetic, manifest round trip and split") {
  const auto dir = fresh_dir("dataset");
  RunConfig cfg;
  cfg.seed = 3;
  cfg.dataset.objects = 3;
  cfg.dataset.views = 2;
  cfg.dataset.points_per_cloud = 5;
  cfg.dataset.test_objects = 1;
  cfg.dataset.dense_surface_count = 4000;
  const Manifest m = build_dataset(dir, cfg);
  CHECK(m.objects.size() == 3);
  CHECK(m.views.size() == 6);
  const DatasetStats all = dataset_stats(dir, m);
  CHECK(all.rot_records == 3u * 2u * 5u);
  CHECK(all.rot_bits == all.rot_records * 196u);
  CHECK(all.gc_records <= 2u * all.rot_records);
  CHECK(all.gc_positive <= all.gc_records);
  const DatasetStats train = dataset_stats(dir, m, Split::Train);
  const DatasetStats test = dataset_stats(dir, m, Split::Test);
  CHECK(train.rot_records + test.rot_records == all.rot_records);
  CHECK(test.rot_records == 10u);

  const Manifest back = read_manifest(dir / "manifest.txt");
  CHECK(dataset_stats(dir, back).to_string() == all.to_string());
  REQUIRE(back.views.size() == m.views.size());
  for (std::size_t i = 0; i < m.views.size(); ++i) {
    CHECK(back.views[i].cloud_file == m.views[i].cloud_file);
    CHECK((back.views[i].camera.rotation() - m.views[i].camera.rotation()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((back.views[i].camera.translation() - m.views[i].camera.translation()).norm() < 1e-8);
  }
  for (const ViewRecord& v : back.views) {
    const auto rot = read_rot_labels(dir / v.rot_file, 196);
    CHECK(rot.size() == 5);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset: a small box is easier to grasp than an over-aperture sphere") {
  const HandGeometry hand;
  const OracleConfig oc;
  const OrientationGrid grid;
  auto positive_rate = [&](const TriangleMesh& mesh, std::uint64_t seed) {
    Rng rng(seed);
    const Pose cam = look_at(Vec3(0.25, 0.2, 0.35), Vec3::Zero());
    const SceneSample scene = make_scene(mesh, cam, CameraIntrinsics::default_intrinsics(), rng, 20000);
    const LabelSurface surface(scene.dense_surface);
    std::size_t pos = 0, bits = 0;
    for (int s = 0; s < 40; ++s) {
      const Vec3 p = scene.cloud.points[rng.below(scene.cloud.size())];
      const LabelVector v = label_vector(scene.cloud, surface, p, grid, cam.rotation(), hand, oc);
      pos += v.count();
      bits += v.size();
    }
    return static_cast<double>(pos) / static_cast<double>(bits);
  };
  const double box = positive_rate(make_box(0.03, 0.03, 0.03), 4);
  const double sphere = positive_rate(make_sphere(0.035, 3), 4);
  CHECK(box > sphere);
}

TEST_CASE("detector: stage counters per mode") {
  RunConfig cfg = small_config();
  const Models models = random_models(cfg, 5);
  const Detector det(models.rot, models.gc, cfg);
  const PointCloud cloud = box_cloud(6);
  const int n = cfg.detector.n_samples, m = 196;

  Rng r1(7);
  const Detection qd = det.detect(cloud, r1, DetectMode::QD);
  CHECK(qd.counters.samples == static_cast<std::size_t>(n));
  CHECK(qd.counters.rot_scored == static_cast<std::size_t>(n * m));
  CHECK(qd.counters.candidates == static_cast<std::size_t>(n * cfg.detector.top_k_orientations));
  CHECK(qd.counters.descriptor_attempts == static_cast<std::size_t>(cfg.detector.descriptor_budget));
  CHECK(qd.counters.gc_scored <= qd.counters.descriptor_attempts);
  CHECK(qd.grasps.size() <= static_cast<std::size_t>(cfg.detector.top_k_final));
  for (const auto& g : qd.grasps) {
    CHECK(g.score_rot.has_value());
    CHECK(g.score_gc.has_value());
  }
  for (std::size_t i = 1; i < qd.grasps.size(); ++i) CHECK(qd.grasps[i - 1].score() >= qd.grasps[i].score());

  Rng r2(7);
  const Detection gc = det.detect(cloud, r2, DetectMode::QDGC);
  CHECK(gc.counters.rot_scored == 0u);
  CHECK(gc.counters.descriptor_attempts == static_cast<std::size_t>(n * m));

  Rng r3(7);
  const Detection rot = det.detect(cloud, r3, DetectMode::QDROT);
  CHECK(rot.counters.descriptor_attempts == 0u);
  CHECK(rot.counters.gc_scored == 0u);
  for (const auto& g : rot.grasps) CHECK_FALSE(g.score_gc.has_value());

  const Detector rot_only(models.rot, std::nullopt, cfg);
  Rng r4(7);
  CHECK_THROWS_AS(rot_only.detect(cloud, r4, DetectMode::QD), ModelMismatch);
  CHECK_THROWS_AS(Detector(models.gc, models.gc, cfg), ModelMismatch);
}

TEST_CASE("detector: QD hypotheses are a subset of the exhaustive QD:GC set") {
  RunConfig cfg = small_config();
  cfg.detector.n_samples = 10;
  cfg.detector.top_k_final = 100000;
  const Models models = random_models(cfg, 8);
  const Detector det(models.rot, models.gc, cfg);
  const PointCloud cloud = box_cloud(9);
  Rng r1(10), r2(10);
  const Detection qd = det.detect(cloud, r1, DetectMode::QD);
  const Detection gc = det.detect(cloud, r2, DetectMode::QDGC);
  CHECK(qd.samples == gc.samples);
  std::map<std::pair<std::size_t, int>, const GraspHypothesis*> all;
  for (const auto& g : gc.grasps) all[{g.sample_index, g.orientation_index}] = &g;
  REQUIRE_FALSE(qd.grasps.empty());
  for (const auto& g : qd.grasps) {
    auto it = all.find({g.sample_index, g.orientation_index});
    REQUIRE(it != all.end());
    CHECK(it->second->pose.translation() == g.pose.translation());
    CHECK(it->second->score_gc == g.score_gc);
  }
}

TEST_CASE("detector: fixed seed gives identical detections; degenerate clouds") {
  const RunConfig cfg = small_config();
  const Models models = random_models(cfg, 11);
  const Detector det(models.rot, models.gc, cfg);
  const PointCloud cloud = box_cloud(12);
  Rng a(13), b(13);
  const Detection x = det.detect(cloud, a, DetectMode::QD);
  const Detection y = det.detect(cloud, b, DetectMode::QD);
  REQUIRE(x.grasps.size() == y.grasps.size());
  for (std::size_t i = 0; i < x.grasps.size(); ++i) {
    CHECK(x.grasps[i].pose.translation() == y.grasps[i].pose.translation());
    CHECK(x.grasps[i].pose.rotation() == y.grasps[i].pose.rotation());
    CHECK(x.grasps[i].score_gc == y.grasps[i].score_gc);
  }

  Rng c(14);
  CHECK_THROWS_AS(det.detect(PointCloud{}, c, DetectMode::QD), EmptyCloud);
  PointCloud single;
  single.points = {Vec3(0.1, 0.0, 0.0)};
  const Detection lone = det.detect(single, c, DetectMode::QD);
  CHECK(lone.grasps.size() <= 196u);
}
