#pragma once

#include "qd/nn/tensor.hpp"

namespace qd::nn {

inline constexpr double kProbabilityClamp = 1e-7;

template <typename T>
struct LossResult {
  T loss = T(0);
  Tensor<T> grad;  // d loss / d pred, same shape as pred
};

// Mean over outputs and batch of -[y log p + (1 - y) log(1 - p)], with p
// clamped to [1e-7, 1 - 1e-7]. The gradient is zero where the clamp is active.
template <typename T>
LossResult<T> bce_loss(const Tensor<T>& pred, const Tensor<T>& target);

extern template LossResult<float> bce_loss(const Tensor<float>&, const Tensor<float>&);
extern template LossResult<double> bce_loss(const Tensor<double>&, const Tensor<double>&);

}  // namespace qd::nn
