#include "qd/encode/height_map.hpp"

#include <algorithm>
#include <cmath>

#include "qd/error.hpp"

namespace qd {

std::array<int, 2> HeightMap::cell_of(const Vec3& p) const {
  return {static_cast<int>(std::floor((p[row_axis] - origin[row_axis]) / resolution)),
          static_cast<int>(std::floor((p[col_axis] - origin[col_axis]) / resolution))};
}

OrthoViews orthographic_views(std::span<const Vec3> camera_points, const Vec3& center, double cube_size,
                              double resolution) {
  if (!(cube_size > 0.0) || !(resolution > 0.0))
    throw InvalidArgument("orthographic_views: cube size and resolution must be positive");
  OrthoViews out;
  out.center = center;
  out.cube_size = cube_size;
  out.resolution = resolution;
  const int n = std::max(1, static_cast<int>(std::ceil(cube_size / resolution - 1e-9)));
  const Vec3 lo = center - Vec3::Constant(0.5 * cube_size);
  const Vec3 hi = center + Vec3::Constant(0.5 * cube_size);
  constexpr int kAxes[3][3] = {{0, 1, 2}, {2, 1, 0}, {0, 2, 1}};  // col, row, height
  for (int v = 0; v < 3; ++v) {
    HeightMap& m = out.views[v];
    m.size = n;
    m.cells.assign(static_cast<std::size_t>(n) * n, 0.0f);
    m.origin = lo;
    m.col_axis = kAxes[v][0];
    m.row_axis = kAxes[v][1];
    m.height_axis = kAxes[v][2];
    m.resolution = resolution;
  }
  for (const Vec3& p : camera_points) {
    if ((p.array() < lo.array()).any() || (p.array() >= hi.array()).any()) continue;
    for (HeightMap& m : out.views) {
      auto [r, c] = m.cell_of(p);
      if (r < 0 || r >= n || c < 0 || c >= n) continue;
      float h = static_cast<float>((hi[m.height_axis] - p[m.height_axis]) / cube_size);
      float& cell = m.cells[static_cast<std::size_t>(r) * n + c];
      cell = std::max(cell, h);
    }
  }
  return out;
}

Image proposal_image(const OrthoViews& views, const Vec3& sample, int crop) {
  Image img(3, crop, crop);
  const int half = crop / 2;
  for (int v = 0; v < 3; ++v) {
    const HeightMap& m = views.views[v];
    auto [r0, c0] = m.cell_of(sample);
    for (int r = 0; r < crop; ++r) {
      int mr = r0 - half + r;
      if (mr < 0 || mr >= m.size) continue;
      for (int c = 0; c < crop; ++c) {
        int mc = c0 - half + c;
        if (mc < 0 || mc >= m.size) continue;
        img.at(v, r, c) = m.at(mr, mc);
      }
    }
  }
  return img;
}

}  // namespace qd
