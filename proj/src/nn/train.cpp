#include "qd/nn/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "qd/error.hpp"
#include "qd/geom/io.hpp"
#include "qd/nn/loss.hpp"

namespace qd::nn {

void TrainConfig::validate() const {
  if (batch_size <= 0) throw InvalidArgument("batch_size must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must be in [0, 1)");
  if (!(lr0 > 0.0)) throw InvalidArgument("lr0 must be positive");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidArgument("lr_decay must be in (0, 1]");
  if (epochs < 0) throw InvalidArgument("epochs must be non-negative");
}

double TrainConfig::learning_rate(int epoch) const { return lr0 * std::pow(lr_decay, epoch); }

template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, SgdState<T>& state, const TrainConfig& cfg,
              int epoch) {
  if (params.size() != grads.size()) throw ShapeMismatch("parameter and gradient counts differ");
  if (state.velocity.size() != params.size()) state.velocity.assign(params.size(), T(0));
  const T mu = static_cast<T>(cfg.momentum);
  const T lr = static_cast<T>(cfg.learning_rate(epoch));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.velocity[i] = mu * state.velocity[i] + grads[i];
    params[i] -= lr * state.velocity[i];
  }
}

namespace {

template <typename T>
void load_batch(const Dataset& data, std::span<const std::size_t> indices, Tensor<T>& input, Tensor<T>& target,
                std::vector<float>& in_buf, std::vector<float>& tgt_buf) {
  const auto shape = data.input_shape();
  const int n = static_cast<int>(indices.size());
  input = Tensor<T>(n, shape[0], shape[1], shape[2]);
  target = Tensor<T>(n, data.target_size(), 1, 1);
  in_buf.resize(input.item_size());
  tgt_buf.resize(target.item_size());
  for (int i = 0; i < n; ++i) {
    data.load(indices[i], in_buf, tgt_buf);
    std::copy(in_buf.begin(), in_buf.end(), input.item(i));
    std::copy(tgt_buf.begin(), tgt_buf.end(), target.item(i));
  }
}

void check_dataset(const NetworkSpec& spec, const Dataset& data) {
  if (data.size() == 0) throw EmptyDataset("training dataset is empty");
  const auto shape = data.input_shape();
  if (shape[0] != spec.in_channels || shape[1] != spec.in_height || shape[2] != spec.in_width)
    throw ShapeMismatch("dataset input shape does not match the network");
  if (data.target_size() != spec.outputs()) throw ShapeMismatch("dataset target size does not match the network");
}

}  // namespace

template <typename T>
double dataset_loss(const Network<T>& net, const Dataset& data, std::size_t count, int batch_size) {
  check_dataset(net.spec(), data);
  const std::size_t total = count == 0 ? data.size() : std::min(count, data.size());
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Tensor<T> input, target;
  std::vector<float> in_buf, tgt_buf;
  double sum = 0.0;
  for (std::size_t b = 0; b < total; b += batch_size) {
    const std::size_t e = std::min(total, b + static_cast<std::size_t>(batch_size));
    load_batch(data, std::span<const std::size_t>(order).subspan(b, e - b), input, target, in_buf, tgt_buf);
    sum += static_cast<double>(bce_loss(net.predict(input), target).loss) * static_cast<double>(e - b);
  }
  return sum / static_cast<double>(total);
}

template <typename T>
TrainResult train(Network<T>& net, const Dataset& data, const TrainConfig& cfg, const TrainOptions<T>& opts) {
  cfg.validate();
  check_dataset(net.spec(), data);
  Rng root(cfg.seed);
  if (opts.initialize) {
    Rng init = root.child("init");
    net.init(init);
  }
  TrainResult result;
  result.initial_loss = dataset_loss(net, data, opts.initial_loss_samples, cfg.batch_size);

  SgdState<T> state;
  std::vector<std::size_t> order(data.size());
  Tensor<T> input, target;
  std::vector<float> in_buf, tgt_buf;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffler = root.child("shuffle").child(static_cast<std::uint64_t>(epoch));
    shuffler.shuffle(std::span<std::size_t>(order));
    double sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      load_batch(data, std::span<const std::size_t>(order).subspan(b, e - b), input, target, in_buf, tgt_buf);
      const Tensor<T>& pred = net.forward(input);
      LossResult<T> loss = bce_loss(pred, target);
      net.zero_grad();
      net.backward(loss.grad, false);
      sgd_step<T>(net.params(), net.grads(), state, cfg, epoch);
      result.step_losses.push_back(static_cast<double>(loss.loss));
      sum += static_cast<double>(loss.loss) * static_cast<double>(e - b);
    }
    EpochLog entry{epoch, cfg.learning_rate(epoch), sum / static_cast<double>(order.size())};
    result.epochs.push_back(entry);
    if (opts.on_epoch) opts.on_epoch(entry);
    if (opts.checkpoint) opts.checkpoint(epoch, net);
  }
  return result;
}

void write_loss_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,lr,mean_loss\n";
  for (const EpochLog& e : log)
    out << e.epoch << ',' << format_double(e.learning_rate) << ',' << format_double(e.mean_loss) << '\n';
}

template void sgd_step(std::span<float>, std::span<const float>, SgdState<float>&, const TrainConfig&, int);
template void sgd_step(std::span<double>, std::span<const double>, SgdState<double>&, const TrainConfig&, int);
template double dataset_loss(const Network<float>&, const Dataset&, std::size_t, int);
template double dataset_loss(const Network<double>&, const Dataset&, std::size_t, int);
template TrainResult train(Network<float>&, const Dataset&, const TrainConfig&, const TrainOptions<float>&);
template TrainResult train(Network<double>&, const Dataset&, const TrainConfig&, const TrainOptions<double>&);

}  // namespace qd::nn
