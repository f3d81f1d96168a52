#include "qd/nn/network.hpp"

#include <Eigen/Core>
#include <cmath>
#include <sstream>

#include "qd/error.hpp"

namespace qd::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRow = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapRow = Eigen::Map<const RowMat<T>>;

// Unfold one C x H x W item into (C*k*k) x (Ho*Wo) patch columns.
template <typename T>
void im2col(const T* in, int c, int h, int w, int k, RowMat<T>& col) {
  const int ho = h - k + 1, wo = w - k + 1;
  col.resize(static_cast<Eigen::Index>(c) * k * k, static_cast<Eigen::Index>(ho) * wo);
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col.row((ch * k + ky) * k + kx).data();
        for (int oy = 0; oy < ho; ++oy) {
          const T* src = in + (static_cast<std::size_t>(ch) * h + oy + ky) * w + kx;
          std::copy(src, src + wo, dst + static_cast<std::size_t>(oy) * wo);
        }
      }
}

// Adjoint of im2col: scatter-add patch gradients back onto the input item.
template <typename T>
void col2im(const RowMat<T>& col, int c, int h, int w, int k, T* out) {
  const int ho = h - k + 1, wo = w - k + 1;
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col.row((ch * k + ky) * k + kx).data();
        for (int oy = 0; oy < ho; ++oy) {
          T* dst = out + (static_cast<std::size_t>(ch) * h + oy + ky) * w + kx;
          const T* s = src + static_cast<std::size_t>(oy) * wo;
          for (int ox = 0; ox < wo; ++ox) dst[ox] += s[ox];
        }
      }
}

}  // namespace

NetworkSpec NetworkSpec::standard(int in_channels, int outputs, int conv1, int conv2, int hidden, int image_size,
                                  int kernel) {
  NetworkSpec s;
  s.in_channels = in_channels;
  s.in_height = s.in_width = image_size;
  s.layers = {{LayerKind::Conv, conv1, kernel}, {LayerKind::Relu},          {LayerKind::Conv, conv2, kernel},
              {LayerKind::Relu},                {LayerKind::Dense, hidden}, {LayerKind::Relu},
              {LayerKind::Dense, outputs},      {LayerKind::Sigmoid}};
  return s;
}

std::vector<std::array<int, 3>> NetworkSpec::layer_shapes() const {
  if (in_channels <= 0 || in_height <= 0 || in_width <= 0) throw ShapeMismatch("network input shape must be positive");
  std::vector<std::array<int, 3>> shapes;
  std::array<int, 3> cur{in_channels, in_height, in_width};
  for (const LayerSpec& l : layers) {
    switch (l.kind) {
      case LayerKind::Conv:
        if (l.out <= 0 || l.kernel <= 0) throw ShapeMismatch("conv layer needs positive width and kernel");
        if (cur[1] < l.kernel || cur[2] < l.kernel) throw ShapeMismatch("conv kernel larger than its input");
        cur = {l.out, cur[1] - l.kernel + 1, cur[2] - l.kernel + 1};
        break;
      case LayerKind::Dense:
        if (l.out <= 0) throw ShapeMismatch("dense layer needs positive width");
        cur = {l.out, 1, 1};
        break;
      case LayerKind::Relu:
      case LayerKind::Sigmoid:
        break;
      default:
        throw ShapeMismatch("unknown layer kind");
    }
    shapes.push_back(cur);
  }
  return shapes;
}

int NetworkSpec::outputs() const {
  auto shapes = layer_shapes();
  if (shapes.empty()) return in_channels * in_height * in_width;
  const auto& s = shapes.back();
  return s[0] * s[1] * s[2];
}

std::size_t NetworkSpec::parameter_count() const {
  std::size_t n = 0;
  std::array<int, 3> cur{in_channels, in_height, in_width};
  auto shapes = layer_shapes();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    std::size_t fan_in = l.kind == LayerKind::Conv ? static_cast<std::size_t>(cur[0]) * l.kernel * l.kernel
                                                   : static_cast<std::size_t>(cur[0]) * cur[1] * cur[2];
    if (l.kind == LayerKind::Conv || l.kind == LayerKind::Dense) n += fan_in * l.out + l.out;
    cur = shapes[i];
  }
  return n;
}

std::string NetworkSpec::describe() const {
  std::ostringstream os;
  os << in_channels << 'x' << in_height << 'x' << in_width;
  for (const LayerSpec& l : layers) {
    switch (l.kind) {
      case LayerKind::Conv: os << " -> conv" << l.kernel << '(' << l.out << ')'; break;
      case LayerKind::Dense: os << " -> fc(" << l.out << ')'; break;
      case LayerKind::Relu: os << " -> relu"; break;
      case LayerKind::Sigmoid: os << " -> sigmoid"; break;
    }
  }
  return os.str();
}

template <typename T>
Network<T>::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  auto shapes = spec_.layer_shapes();
  std::array<int, 3> cur{spec_.in_channels, spec_.in_height, spec_.in_width};
  std::size_t offset = 0;
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    Slot s{spec_.layers[i], cur, shapes[i]};
    if (s.spec.kind == LayerKind::Conv) {
      s.weight_count = static_cast<std::size_t>(s.spec.out) * cur[0] * s.spec.kernel * s.spec.kernel;
      s.bias_count = static_cast<std::size_t>(s.spec.out);
    } else if (s.spec.kind == LayerKind::Dense) {
      s.weight_count = static_cast<std::size_t>(s.spec.out) * cur[0] * cur[1] * cur[2];
      s.bias_count = static_cast<std::size_t>(s.spec.out);
    }
    s.weight_offset = offset;
    s.bias_offset = offset + s.weight_count;
    offset += s.weight_count + s.bias_count;
    slots_.push_back(s);
    cur = shapes[i];
  }
  params_.assign(offset, T(0));
  grads_.assign(offset, T(0));
}

template <typename T>
void Network<T>::init(Rng& rng) {
  for (const Slot& s : slots_) {
    if (s.weight_count == 0) continue;
    const double fan_in = static_cast<double>(s.weight_count) / s.spec.out;
    const double bound = std::sqrt(6.0 / fan_in);
    for (std::size_t i = 0; i < s.weight_count; ++i)
      params_[s.weight_offset + i] = static_cast<T>(rng.uniform(-bound, bound));
    for (std::size_t i = 0; i < s.bias_count; ++i) params_[s.bias_offset + i] = T(0);
  }
}

template <typename T>
void Network<T>::zero_grad() {
  std::fill(grads_.begin(), grads_.end(), T(0));
}

template <typename T>
void Network<T>::check_input(const Tensor<T>& input) const {
  if (input.channels() != spec_.in_channels || input.height() != spec_.in_height ||
      input.width() != spec_.in_width || input.batch() <= 0)
    throw ShapeMismatch("network input shape does not match its spec");
}

template <typename T>
Tensor<T> Network<T>::layer_forward(const Slot& s, const Tensor<T>& in) const {
  const int n = in.batch();
  Tensor<T> out(n, s.out_shape[0], s.out_shape[1], s.out_shape[2]);
  switch (s.spec.kind) {
    case LayerKind::Conv: {
      const int k = s.spec.kernel;
      const int ckk = s.in_shape[0] * k * k;
      const int hw = s.out_shape[1] * s.out_shape[2];
      ConstMapRow<T> w(params_.data() + s.weight_offset, s.spec.out, ckk);
      Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(params_.data() + s.bias_offset, s.spec.out);
      RowMat<T> col;
      for (int i = 0; i < n; ++i) {
        im2col(in.item(i), s.in_shape[0], s.in_shape[1], s.in_shape[2], k, col);
        MapRow<T> o(out.item(i), s.spec.out, hw);
        o.noalias() = w * col;
        o.colwise() += b;
      }
      break;
    }
    case LayerKind::Dense: {
      const int d = static_cast<int>(in.item_size());
      ConstMapRow<T> x(in.data.data(), n, d);
      ConstMapRow<T> w(params_.data() + s.weight_offset, s.spec.out, d);
      Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(params_.data() + s.bias_offset, s.spec.out);
      MapRow<T> o(out.data.data(), n, s.spec.out);
      o.noalias() = x * w.transpose();
      o.rowwise() += b;
      break;
    }
    case LayerKind::Relu:
      for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > T(0) ? in.data[i] : T(0);
      break;
    case LayerKind::Sigmoid:
      for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = T(1) / (T(1) + std::exp(-in.data[i]));
      break;
  }
  return out;
}

template <typename T>
Tensor<T> Network<T>::layer_backward(const Slot& s, const Tensor<T>& in, const Tensor<T>& out,
                                     const Tensor<T>& grad_out, bool input_grad) {
  const int n = in.batch();
  Tensor<T> grad_in;
  if (input_grad) grad_in = Tensor<T>(n, s.in_shape[0], s.in_shape[1], s.in_shape[2]);
  switch (s.spec.kind) {
    case LayerKind::Conv: {
      const int k = s.spec.kernel;
      const int ckk = s.in_shape[0] * k * k;
      const int hw = s.out_shape[1] * s.out_shape[2];
      ConstMapRow<T> w(params_.data() + s.weight_offset, s.spec.out, ckk);
      MapRow<T> gw(grads_.data() + s.weight_offset, s.spec.out, ckk);
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> gb(grads_.data() + s.bias_offset, s.spec.out);
      RowMat<T> col, gcol;
      for (int i = 0; i < n; ++i) {
        ConstMapRow<T> go(grad_out.item(i), s.spec.out, hw);
        im2col(in.item(i), s.in_shape[0], s.in_shape[1], s.in_shape[2], k, col);
        gw.noalias() += go * col.transpose();
        gb += go.rowwise().sum();
        if (!input_grad) continue;
        gcol.noalias() = w.transpose() * go;
        col2im(gcol, s.in_shape[0], s.in_shape[1], s.in_shape[2], k, grad_in.item(i));
      }
      break;
    }
    case LayerKind::Dense: {
      const int d = static_cast<int>(in.item_size());
      ConstMapRow<T> x(in.data.data(), n, d);
      ConstMapRow<T> w(params_.data() + s.weight_offset, s.spec.out, d);
      ConstMapRow<T> go(grad_out.data.data(), n, s.spec.out);
      MapRow<T> gw(grads_.data() + s.weight_offset, s.spec.out, d);
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gb(grads_.data() + s.bias_offset, s.spec.out);
      gw.noalias() += go.transpose() * x;
      gb += go.colwise().sum();
      if (!input_grad) break;
      MapRow<T> gi(grad_in.data.data(), n, d);
      gi.noalias() = go * w;
      break;
    }
    case LayerKind::Relu:
      if (!input_grad) break;
      for (std::size_t i = 0; i < in.size(); ++i) grad_in.data[i] = in.data[i] > T(0) ? grad_out.data[i] : T(0);
      break;
    case LayerKind::Sigmoid:
      if (!input_grad) break;
      for (std::size_t i = 0; i < in.size(); ++i)
        grad_in.data[i] = grad_out.data[i] * out.data[i] * (T(1) - out.data[i]);
      break;
  }
  return grad_in;
}

template <typename T>
const Tensor<T>& Network<T>::forward(const Tensor<T>& input) {
  check_input(input);
  activations_.clear();
  activations_.reserve(slots_.size() + 1);
  activations_.push_back(input);
  for (const Slot& s : slots_) activations_.push_back(layer_forward(s, activations_.back()));
  return activations_.back();
}

template <typename T>
Tensor<T> Network<T>::predict(const Tensor<T>& input) const {
  check_input(input);
  Tensor<T> cur = input;
  for (const Slot& s : slots_) cur = layer_forward(s, cur);
  return cur;
}

template <typename T>
Tensor<T> Network<T>::backward(const Tensor<T>& grad_output, bool input_grad) {
  if (activations_.size() != slots_.size() + 1) throw ShapeMismatch("backward() without a preceding forward()");
  if (grad_output.shape != activations_.back().shape) throw ShapeMismatch("output gradient shape mismatch");
  Tensor<T> grad = grad_output;
  for (std::size_t i = slots_.size(); i-- > 0;)
    grad = layer_backward(slots_[i], activations_[i], activations_[i + 1], grad, input_grad || i > 0);
  return grad;
}

template class Network<float>;
template class Network<double>;

}  // namespace qd::nn
