#pragma once

#include <vector>

#include "qd/geom/point_cloud.hpp"

namespace qd {

struct NormalParams {
  std::size_t k = 30;
  // The neighborhood is whichever of k-NN or this radius holds more points.
  double radius = 0.01;
};

struct NormalEstimate {
  PointCloud cloud;  // input points with normals filled in
  // Points whose neighborhood covariance had rank < 2; their normal is the
  // unit direction towards the viewpoint.
  std::vector<std::size_t> degenerate;
};

// PCA normals: smallest-eigenvalue eigenvector of the neighborhood
// covariance, flipped to face cloud.viewpoint. k is clamped to the cloud size.
NormalEstimate estimate_normals(const PointCloud& cloud, const NormalParams& params = {});

}  // namespace qd
