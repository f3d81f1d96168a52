#include "qd/geom/normals.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "qd/geom/spatial_index.hpp"

namespace qd {

NormalEstimate estimate_normals(const PointCloud& cloud, const NormalParams& params) {
  NormalEstimate out;
  out.cloud.points = cloud.points;
  out.cloud.viewpoint = cloud.viewpoint;
  std::vector<Vec3> normals(cloud.size());
  SpatialIndex index(cloud.points);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    std::vector<std::size_t> nbrs = index.knn_search(p, params.k);
    std::vector<std::size_t> ball = index.radius_search(p, params.radius);
    if (ball.size() > nbrs.size()) nbrs = std::move(ball);

    Vec3 mean = Vec3::Zero();
    for (std::size_t j : nbrs) mean += cloud.points[j];
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (std::size_t j : nbrs) {
      Vec3 d = cloud.points[j] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
    const Vec3& ev = solver.eigenvalues();  // ascending
    Vec3 to_view = cloud.viewpoint - p;
    if (nbrs.size() < 3 || !(ev[1] > 1e-10 * ev[2])) {
      normals[i] = to_view.norm() > 0.0 ? to_view.normalized() : Vec3::UnitZ();
      out.degenerate.push_back(i);
      continue;
    }
    Vec3 n = solver.eigenvectors().col(0).normalized();
    if (n.dot(to_view) < 0.0) n = -n;
    normals[i] = n;
  }
  out.cloud.normals = std::move(normals);
  return out;
}

}  // namespace qd
