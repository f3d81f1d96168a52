#include "qd/nn/loss.hpp"

#include <cmath>

#include "qd/error.hpp"

namespace qd::nn {

template <typename T>
LossResult<T> bce_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  if (pred.shape != target.shape) throw ShapeMismatch("prediction and target shapes differ");
  if (pred.size() == 0) throw ShapeMismatch("empty prediction");
  LossResult<T> r;
  r.grad = Tensor<T>(pred.shape[0], pred.shape[1], pred.shape[2], pred.shape[3]);
  const T lo = static_cast<T>(kProbabilityClamp);
  const T hi = T(1) - lo;
  const T inv_n = T(1) / static_cast<T>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T raw = pred.data[i];
    const T p = std::min(std::max(raw, lo), hi);
    const T y = target.data[i];
    sum += -(static_cast<double>(y) * std::log(static_cast<double>(p)) +
             (1.0 - static_cast<double>(y)) * std::log(1.0 - static_cast<double>(p)));
    const bool clamped = raw < lo || raw > hi;
    r.grad.data[i] = clamped ? T(0) : (-y / p + (T(1) - y) / (T(1) - p)) * inv_n;
  }
  r.loss = static_cast<T>(sum / static_cast<double>(pred.size()));
  return r;
}

template LossResult<float> bce_loss(const Tensor<float>&, const Tensor<float>&);
template LossResult<double> bce_loss(const Tensor<double>&, const Tensor<double>&);

}  // namespace qd::nn
