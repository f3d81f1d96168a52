#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "qd/nn/network.hpp"

namespace qd::nn {

struct TrainConfig {
  int batch_size = 64;
  double momentum = 0.9;
  double lr0 = 0.01;
  double lr_decay = 0.96;  // per epoch
  int epochs = 10;
  std::uint64_t seed = 0;

  void validate() const;
  double learning_rate(int epoch) const;
};

template <typename T>
struct SgdState {
  std::vector<T> velocity;
};

// v <- momentum * v + g; w <- w - lr(epoch) * v.
template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, SgdState<T>& state, const TrainConfig& cfg, int epoch);

// Random-access training samples. Inputs are (channels, height, width)
// images flattened channel-major; targets are 0/1 per network output.
class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual std::size_t size() const = 0;
  virtual std::array<int, 3> input_shape() const = 0;
  virtual int target_size() const = 0;
  virtual void load(std::size_t index, std::span<float> input, std::span<float> target) const = 0;
};

struct EpochLog {
  int epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
};

struct TrainResult {
  double initial_loss = 0.0;       // mean loss of the initialized network
  std::vector<EpochLog> epochs;
  std::vector<double> step_losses;  // one per mini-batch, in order
};

template <typename T>
struct TrainOptions {
  // Initialize weights from the config seed before training.
  bool initialize = true;
  // Samples used to measure the initial loss (0 = whole dataset).
  std::size_t initial_loss_samples = 0;
  // Called after every epoch with the updated network.
  std::function<void(int epoch, const Network<T>&)> checkpoint;
  // Called after every epoch with its log entry.
  std::function<void(const EpochLog&)> on_epoch;
};

// Mean loss of the network over the first `count` samples (0 = all).
template <typename T>
double dataset_loss(const Network<T>& net, const Dataset& data, std::size_t count = 0, int batch_size = 64);

// Mini-batch SGD over a per-epoch seeded shuffle. Throws EmptyDataset.
template <typename T>
TrainResult train(Network<T>& net, const Dataset& data, const TrainConfig& cfg, const TrainOptions<T>& opts = {});

// CSV with header "epoch,lr,mean_loss".
void write_loss_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

extern template void sgd_step(std::span<float>, std::span<const float>, SgdState<float>&, const TrainConfig&, int);
extern template void sgd_step(std::span<double>, std::span<const double>, SgdState<double>&, const TrainConfig&,
                              int);
extern template double dataset_loss(const Network<float>&, const Dataset&, std::size_t, int);
extern template double dataset_loss(const Network<double>&, const Dataset&, std::size_t, int);
extern template TrainResult train(Network<float>&, const Dataset&, const TrainConfig&, const TrainOptions<float>&);
extern template TrainResult train(Network<double>&, const Dataset&, const TrainConfig&,
                                  const TrainOptions<double>&);

}  // namespace qd::nn
