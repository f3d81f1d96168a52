#pragma once

#include <array>
#include <span>

#include "qd/encode/image.hpp"
#include "qd/geom/point_cloud.hpp"

namespace qd {

inline constexpr int kImageSize = 60;
inline constexpr double kDefaultViewResolution = 0.002;

// Square height map. A cell holds the largest normalized height among the
// points that bin into it; empty cells hold 0.
struct HeightMap {
  int size = 0;                 // cells per side
  std::vector<float> cells;     // row-major
  Vec3 origin = Vec3::Zero();   // corner of cell (0, 0), camera frame
  int col_axis = 0;             // camera-frame axis indexed by columns
  int row_axis = 1;             // camera-frame axis indexed by rows
  int height_axis = 2;          // projection direction; height grows against it
  double resolution = kDefaultViewResolution;

  float at(int row, int col) const { return cells[static_cast<std::size_t>(row) * size + col]; }
  // Cell of a camera-frame point; may lie outside [0, size).
  std::array<int, 2> cell_of(const Vec3& p) const;
};

// Three orthographic views of a cube around `center`, all in camera frame:
// view 0 looks along +z (cols x, rows y), view 1 along +x (cols z, rows y),
// view 2 along +y (cols x, rows z). Heights are measured from the cube's far
// face along the viewing direction and divided by cube_size, so they lie in
// [0, 1]. Points outside the cube are dropped.
struct OrthoViews {
  std::array<HeightMap, 3> views;
  Vec3 center = Vec3::Zero();
  double cube_size = 0.0;
  double resolution = kDefaultViewResolution;
};

OrthoViews orthographic_views(std::span<const Vec3> camera_points, const Vec3& center, double cube_size,
                              double resolution = kDefaultViewResolution);

// Stack of three crop x crop windows, one per view, each centered on the
// cell of `sample` (camera frame). Windows overrunning a view read as 0.
Image proposal_image(const OrthoViews& views, const Vec3& sample, int crop = kImageSize);

}  // namespace qd
