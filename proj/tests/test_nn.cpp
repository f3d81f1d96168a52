#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qd/error.hpp"
#include "qd/nn/loss.hpp"
#include "qd/nn/model_file.hpp"
#include "qd/nn/network.hpp"
#include "qd/nn/train.hpp"
#include "support/gradcheck.hpp"

using namespace qd;
using namespace qd::nn;

namespace {

class MemoryDataset : public Dataset {
 public:
  MemoryDataset(std::array<int, 3> shape, int targets) : shape_(shape), targets_(targets) {}
  void add(std::vector<float> x, std::vector<float> y) {
    inputs_.push_back(std::move(x));
    labels_.push_back(std::move(y));
  }
  std::size_t size() const override { return inputs_.size(); }
  std::array<int, 3> input_shape() const override { return shape_; }
  int target_size() const override { return targets_; }
  void load(std::size_t i, std::span<float> x, std::span<float> y) const override {
    std::copy(inputs_[i].begin(), inputs_[i].end(), x.begin());
    std::copy(labels_[i].begin(), labels_[i].end(), y.begin());
  }
  std::vector<std::vector<float>>& labels() { return labels_; }

 private:
  std::array<int, 3> shape_;
  int targets_;
  std::vector<std::vector<float>> inputs_;
  std::vector<std::vector<float>> labels_;
};

NetworkSpec toy_spec() { return NetworkSpec::standard(3, 4, 2, 3, 8, 12, 3); }

MemoryDataset random_dataset(Rng& rng, const NetworkSpec& spec, std::size_t n, double positive_rate) {
  MemoryDataset d({spec.in_channels, spec.in_height, spec.in_width}, spec.outputs());
  const std::size_t in = static_cast<std::size_t>(spec.in_channels) * spec.in_height * spec.in_width;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> x(in), y(static_cast<std::size_t>(spec.outputs()));
    for (float& v : x) v = static_cast<float>(rng.uniform());
    for (float& v : y) v = rng.uniform() < positive_rate ? 1.0f : 0.0f;
    d.add(std::move(x), std::move(y));
  }
  return d;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qd_test_nn_" + name);
}

}  // namespace

TEST_CASE("network: default shape chains") {
  const NetworkSpec rot = NetworkSpec::standard(3, 196);
  const auto shapes = rot.layer_shapes();
  REQUIRE(shapes.size() == 8);
  CHECK(shapes[0] == std::array<int, 3>{32, 56, 56});
  CHECK(shapes[2] == std::array<int, 3>{64, 52, 52});
  CHECK(shapes[4] == std::array<int, 3>{256, 1, 1});
  CHECK(rot.outputs() == 196);
  CHECK(NetworkSpec::standard(4, 1).outputs() == 1);
  CHECK(rot.parameter_count() == (32 * 3 * 25 + 32) + (64 * 32 * 25 + 64) + (256 * 64 * 52 * 52 + 256) + (196 * 256 + 196));
  NetworkSpec bad = rot;
  bad.in_height = 7;
  CHECK_THROWS_AS(bad.layer_shapes(), ShapeMismatch);
}

TEST_CASE("network: zero weights give 0.5 everywhere") {
  Network<float> net(toy_spec());
  std::fill(net.params().begin(), net.params().end(), 0.0f);
  Rng rng(1);
  Tensor<float> x(2, 3, 12, 12);
  for (float& v : x.data) v = static_cast<float>(rng.uniform());
  for (float v : net.predict(x).data) CHECK(v == 0.5f);
}

TEST_CASE("network: batch rows are independent of order") {
  Rng rng(2);
  Network<double> net(toy_spec());
  net.init(rng);
  Tensor<double> x(4, 3, 12, 12);
  for (double& v : x.data) v = rng.uniform();
  const Tensor<double> y = net.predict(x);
  Tensor<double> rev(4, 3, 12, 12);
  for (int n = 0; n < 4; ++n) std::copy(x.item(n), x.item(n) + x.item_size(), rev.item(3 - n));
  const Tensor<double> yr = net.predict(rev);
  for (int n = 0; n < 4; ++n)
    for (std::size_t k = 0; k < y.item_size(); ++k) CHECK(y.item(n)[k] == yr.item(3 - n)[k]);
  CHECK(net.forward(x).data == y.data);
}

TEST_CASE("network: init is uniform within the He bound") {
  Rng rng(3);
  Network<double> net(toy_spec());
  net.init(rng);
  // First conv: fan_in = 3 * 3 * 3.
  const double bound = std::sqrt(6.0 / 27.0);
  for (std::size_t i = 0; i < 2 * 27; ++i) CHECK(std::abs(net.params()[i]) <= bound);
  for (std::size_t i = 54; i < 56; ++i) CHECK(net.params()[i] == 0.0);
}

TEST_CASE("bce: worked examples") {
  Tensor<double> p(1, 2, 1, 1), y(1, 2, 1, 1);
  p.data = {0.5, 0.5};
  y.data = {1.0, 0.0};
  CHECK(bce_loss(p, y).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  p.data = {0.9, 0.2};
  const double expect = -(std::log(0.9) + std::log(0.8)) / 2;
  const auto r = bce_loss(p, y);
  CHECK(r.loss == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.grad.data[0] == doctest::Approx(-1.0 / 0.9 / 2).epsilon(1e-12));
  CHECK(r.grad.data[1] == doctest::Approx(1.0 / 0.8 / 2).epsilon(1e-12));
  // Saturated prediction: finite loss, zero gradient.
  p.data = {0.0, 1.0};
  const auto s = bce_loss(p, y);
  CHECK(std::isfinite(s.loss));
  CHECK(s.loss == doctest::Approx(-std::log(1e-7)).epsilon(1e-9));
  CHECK(s.grad.data[0] == 0.0);
  CHECK(s.grad.data[1] == 0.0);
  p.data = {1.0, 0.0};
  CHECK(bce_loss(p, y).loss <= 1e-6);
  Tensor<double> wrong(1, 3, 1, 1);
  CHECK_THROWS_AS(bce_loss(p, wrong), ShapeMismatch);
}

TEST_CASE("bce: gradient matches central differences") {
  Rng rng(4);
  for (int i = 0; i < 20; ++i)
    CHECK(qdtest::check_bce_gradient(rng, 1 + static_cast<int>(rng.below(4)), 1 + static_cast<int>(rng.below(8)))
              .max_rel_error < 1e-6);
}

TEST_CASE("backward: every layer kind and the full stack match central differences") {
  Rng rng(5);
  for (int form = 0; form < 5; ++form)
    for (int trial = 0; trial < 4; ++trial) {
      const NetworkSpec spec = qdtest::random_spec(rng, form);
      const auto r = qdtest::check_network_gradients(spec, 1 + static_cast<int>(rng.below(3)), rng);
      INFO(spec.describe());
      CHECK(r.probes > 0);
      CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("backward: zero upstream gives zero gradients, doubled upstream doubles them") {
  Rng rng(6);
  Network<double> net(toy_spec());
  net.init(rng);
  Tensor<double> x(2, 3, 12, 12);
  for (double& v : x.data) v = rng.uniform();
  Tensor<double> g = net.forward(x);
  std::fill(g.data.begin(), g.data.end(), 0.0);
  net.zero_grad();
  const Tensor<double> gx0 = net.backward(g);
  for (double v : net.grads()) CHECK(v == 0.0);
  for (double v : gx0.data) CHECK(v == 0.0);
  for (double& v : g.data) v = rng.uniform(-1, 1);
  net.zero_grad();
  net.forward(x);
  const Tensor<double> gx1 = net.backward(g);
  const std::vector<double> g1(net.grads().begin(), net.grads().end());
  for (double& v : g.data) v *= 2;
  net.zero_grad();
  net.forward(x);
  const Tensor<double> gx2 = net.backward(g);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(net.grads()[i] == doctest::Approx(2 * g1[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < gx1.size(); ++i) CHECK(gx2.data[i] == doctest::Approx(2 * gx1.data[i]).epsilon(1e-12));
  // Skipping the input gradient leaves parameter gradients unchanged.
  net.zero_grad();
  net.forward(x);
  CHECK(net.backward(g, false).size() == 0);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(net.grads()[i] == doctest::Approx(2 * g1[i]).epsilon(1e-12));
}

TEST_CASE("sgd: learning-rate schedule and momentum update") {
  TrainConfig cfg;
  CHECK(cfg.learning_rate(0) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(cfg.learning_rate(10) == doctest::Approx(0.006648).epsilon(1e-4));
  std::vector<double> w{1.0, -1.0}, g{0.5, 0.25};
  SgdState<double> s;
  sgd_step<double>(w, g, s, cfg, 0);
  CHECK(w[0] == doctest::Approx(1.0 - 0.01 * 0.5));
  sgd_step<double>(w, g, s, cfg, 0);
  CHECK(s.velocity[0] == doctest::Approx(0.9 * 0.5 + 0.5));
  CHECK(w[0] == doctest::Approx(1.0 - 0.005 - 0.01 * 0.95));
  std::vector<double> still{0.3, -0.7}, zero{0.0, 0.0};
  SgdState<double> fresh;
  sgd_step<double>(still, zero, fresh, cfg, 3);
  CHECK(still == std::vector<double>{0.3, -0.7});
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("train: one epoch on a repeated sample lowers the loss at every step") {
  Rng rng(7);
  const NetworkSpec spec = toy_spec();
  MemoryDataset one = random_dataset(rng, spec, 1, 0.5);
  MemoryDataset d({3, 12, 12}, 4);
  for (int i = 0; i < 32; ++i) {
    std::vector<float> x(3 * 12 * 12), y(4);
    one.load(0, x, y);
    d.add(x, y);
  }
  Network<double> net(spec);
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.epochs = 1;
  const TrainResult r = train(net, d, cfg);
  REQUIRE(r.step_losses.size() == 32);
  for (std::size_t i = 1; i < r.step_losses.size(); ++i) CHECK(r.step_losses[i] < r.step_losses[i - 1]);
  REQUIRE(r.epochs.size() == 1);
  CHECK(r.epochs[0].mean_loss < r.initial_loss);
}

TEST_CASE("train: same seed gives identical runs") {
  Rng rng(8);
  const NetworkSpec spec = toy_spec();
  const MemoryDataset d = random_dataset(rng, spec, 50, 0.3);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 7;
  cfg.seed = 99;
  Network<double> a(spec), b(spec);
  const TrainResult ra = train(a, d, cfg);
  const TrainResult rb = train(b, d, cfg);
  CHECK(ra.step_losses == rb.step_losses);
  CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
}

TEST_CASE("train: shuffled labels cannot be learned below chance") {
  Rng rng(9);
  const NetworkSpec spec = NetworkSpec::standard(1, 1, 2, 2, 4, 8, 3);
  MemoryDataset train_set = random_dataset(rng, spec, 200, 0.5);
  const MemoryDataset held = random_dataset(rng, spec, 400, 0.5);
  Network<double> net(spec);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  train(net, train_set, cfg);
  CHECK(dataset_loss(net, held) >= 0.5 * std::log(2.0));
}

TEST_CASE("train: empty or mismatched data throws") {
  Network<float> net(toy_spec());
  MemoryDataset empty({3, 12, 12}, 4);
  CHECK_THROWS_AS(train(net, empty, TrainConfig{}), EmptyDataset);
  Rng rng(10);
  const MemoryDataset wrong = random_dataset(rng, NetworkSpec::standard(1, 4, 2, 3, 8, 12, 3), 3, 0.5);
  CHECK_THROWS_AS(train(net, wrong, TrainConfig{}), ShapeMismatch);
}

TEST_CASE("loss log: header and rows") {
  const auto path = temp_file("loss.csv");
  write_loss_log(path, {{0, 0.01, 0.7}, {1, 0.0096, 0.5}});
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,lr,mean_loss");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::filesystem::remove(path);
}

TEST_CASE("model file: round trip, bad magic, truncation, mismatch") {
  Rng rng(11);
  Network<float> net(toy_spec());
  net.init(rng);
  const auto path = temp_file("model.bin");
  ModelFile m = to_model_file(net, GridParams{});
  save_model(path, m);
  const ModelFile back = load_model(path);
  CHECK(back.spec == net.spec());
  CHECK(back.grid.has_value());
  CHECK(back.params == m.params);
  Network<float> again = make_network<float>(back);
  Tensor<float> x(1, 3, 12, 12, 0.25f);
  CHECK(again.predict(x).data == net.predict(x).data);

  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write_bytes = [&](const std::string& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  const auto copy = temp_file("model_copy.bin");
  save_model(copy, back);
  {
    std::ifstream in(copy, std::ios::binary);
    CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == bytes);
  }
  std::filesystem::remove(copy);
  std::string bad = bytes;
  bad[0] = 'X';
  write_bytes(bad);
  CHECK_THROWS_AS(load_model(path), FormatError);
  write_bytes(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_model(path), FormatError);
  std::filesystem::remove(path);

  m.params.pop_back();
  CHECK_THROWS_AS(make_network<float>(m), ModelMismatch);
}
