#pragma once

#include <array>
#include <cstddef>
#include <new>
#include <vector>

namespace qd::nn {

// Vectorized Eigen kernels pick their summation order from the data
// address; a fixed alignment keeps results identical across runs.
inline constexpr std::size_t kBufferAlignment = 64;

template <typename T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t{kBufferAlignment}));
  }
  void deallocate(T* p, std::size_t) { ::operator delete(p, std::align_val_t{kBufferAlignment}); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

// Dense (batch, channels, height, width) tensor in row-major order. Fully
// connected activations use (batch, features, 1, 1).
template <typename T>
struct Tensor {
  std::array<int, 4> shape{0, 0, 0, 0};
  AlignedVector<T> data;

  Tensor() = default;
  Tensor(int n, int c, int h, int w, T fill = T(0))
      : shape{n, c, h, w}, data(static_cast<std::size_t>(n) * c * h * w, fill) {}

  int batch() const { return shape[0]; }
  int channels() const { return shape[1]; }
  int height() const { return shape[2]; }
  int width() const { return shape[3]; }
  // Elements per batch item.
  std::size_t item_size() const { return static_cast<std::size_t>(shape[1]) * shape[2] * shape[3]; }
  std::size_t size() const { return data.size(); }

  T* item(int n) { return data.data() + n * item_size(); }
  const T* item(int n) const { return data.data() + n * item_size(); }
  T& operator()(int n, int c, int h, int w) {
    return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
  T operator()(int n, int c, int h, int w) const {
    return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
};

}  // namespace qd::nn
