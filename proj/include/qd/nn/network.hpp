#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qd/geom/rng.hpp"
#include "qd/nn/tensor.hpp"

namespace qd::nn {

enum class LayerKind : std::uint32_t { Conv = 1, Relu = 2, Dense = 3, Sigmoid = 4 };

// Conv: valid (no padding), stride 1, `kernel` x `kernel`, `out` channels.
// Dense: `out` units over the flattened input.
struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int out = 0;
  int kernel = 0;

  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  int in_channels = 3;
  int in_height = 60;
  int in_width = 60;
  std::vector<LayerSpec> layers;

  // conv -> relu -> conv -> relu -> dense -> relu -> dense -> sigmoid.
  static NetworkSpec standard(int in_channels, int outputs, int conv1 = 32, int conv2 = 64, int hidden = 256,
                              int image_size = 60, int kernel = 5);

  // Output (channels, height, width) after each layer; throws ShapeMismatch
  // when the layers do not chain.
  std::vector<std::array<int, 3>> layer_shapes() const;
  int outputs() const;
  std::size_t parameter_count() const;
  std::string describe() const;

  bool operator==(const NetworkSpec&) const = default;
};

// Sequential network with a flat parameter vector: for each layer in order,
// weights (conv: out x in x k x k, dense: out x in) then biases.
template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }

  // Weights uniform in +-sqrt(6 / fan_in), biases zero.
  void init(Rng& rng);

  // Forward pass that keeps activations for a following backward().
  const Tensor<T>& forward(const Tensor<T>& input);
  // Forward pass without caching; safe to call concurrently.
  Tensor<T> predict(const Tensor<T>& input) const;
  // Accumulates parameter gradients for the last forward(); returns the
  // gradient with respect to the input, or an empty tensor when
  // `input_grad` is false (the first layer then skips that work).
  Tensor<T> backward(const Tensor<T>& grad_output, bool input_grad = true);

  void zero_grad();
  std::span<T> params() { return params_; }
  std::span<const T> params() const { return params_; }
  std::span<T> grads() { return grads_; }
  std::span<const T> grads() const { return grads_; }

 private:
  struct Slot {
    LayerSpec spec;
    std::array<int, 3> in_shape;
    std::array<int, 3> out_shape;
    std::size_t weight_offset = 0;
    std::size_t weight_count = 0;
    std::size_t bias_offset = 0;
    std::size_t bias_count = 0;
  };

  Tensor<T> layer_forward(const Slot& slot, const Tensor<T>& in) const;
  Tensor<T> layer_backward(const Slot& slot, const Tensor<T>& in, const Tensor<T>& out, const Tensor<T>& grad_out,
                           bool input_grad);
  void check_input(const Tensor<T>& input) const;

  NetworkSpec spec_;
  std::vector<Slot> slots_;
  AlignedVector<T> params_;
  AlignedVector<T> grads_;
  std::vector<Tensor<T>> activations_;  // activations_[i] is the input of layer i; last is the output
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace qd::nn
