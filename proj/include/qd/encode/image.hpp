#pragma once

#include <cstddef>
#include <vector>

namespace qd {

// Channel-major float image (channels x rows x cols).
struct Image {
  int channels = 0;
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  Image() = default;
  Image(int c, int r, int w, float fill = 0.0f)
      : channels(c), rows(r), cols(w), data(static_cast<std::size_t>(c) * r * w, fill) {}

  float& at(int c, int r, int w) { return data[(static_cast<std::size_t>(c) * rows + r) * cols + w]; }
  float at(int c, int r, int w) const { return data[(static_cast<std::size_t>(c) * rows + r) * cols + w]; }
  std::size_t size() const { return data.size(); }
};

}  // namespace qd
