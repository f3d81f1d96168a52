#include "qd/encode/grasp_descriptor.hpp"

#include <algorithm>
#include <cmath>

#include "qd/error.hpp"

namespace qd {

namespace {

// Binning coordinates snap to a 1 nm lattice first. The sample point sits on
// the edge between the two central columns, and without the snap rounding
// noise from the pose would decide its column.
constexpr double kBinLattice = 1e-9;

double snapped(double v) { return std::nearbyint(v / kBinLattice) * kBinLattice; }

}  // namespace

GraspDescriptor grasp_descriptor(const PointCloud& cloud, const Pose& pose, const HandGeometry& hand, int size) {
  if (!cloud.has_normals()) throw InvalidArgument("grasp_descriptor: cloud normals required");
  GraspDescriptor out{Image(4, size, size)};
  for (int c = 1; c < 4; ++c)
    std::fill(out.image.data.begin() + static_cast<std::ptrdiff_t>(c) * size * size,
              out.image.data.begin() + static_cast<std::ptrdiff_t>(c + 1) * size * size, 0.5f);

  const Eigen::Matrix3Xd local = to_hand_frame(cloud.points, pose);
  const auto region = closing_region_local(local, hand, hand.max_aperture);
  if (region.empty()) {
    out.empty_region = true;
    return out;
  }

  const double half_a = 0.5 * hand.max_aperture;
  const double half_l = 0.5 * hand.finger_length;
  const double half_h = 0.5 * hand.hand_height;
  const Mat3 rt = pose.rotation().transpose();
  std::vector<Vec3> normal_sum(static_cast<std::size_t>(size) * size, Vec3::Zero());
  std::vector<int> filled(normal_sum.size(), 0);
  for (std::size_t i : region) {
    const Eigen::Index k = static_cast<Eigen::Index>(i);
    const double x = (snapped(local(0, k)) + half_a) / hand.max_aperture;
    const double z = (snapped(local(2, k)) + half_l) / hand.finger_length;
    int col = std::clamp(static_cast<int>(std::floor(x * size)), 0, size - 1);
    int row = std::clamp(static_cast<int>(std::floor(z * size)), 0, size - 1);
    std::size_t cell = static_cast<std::size_t>(row) * size + col;
    float h = static_cast<float>(std::clamp((local(1, k) + half_h) / hand.hand_height, 0.0, 1.0));
    float& hc = out.image.at(0, row, col);
    hc = filled[cell] ? std::max(hc, h) : h;
    filled[cell] = 1;
    normal_sum[cell] += rt * (*cloud.normals)[i];
  }
  for (int row = 0; row < size; ++row) {
    for (int col = 0; col < size; ++col) {
      std::size_t cell = static_cast<std::size_t>(row) * size + col;
      if (!filled[cell]) continue;
      double norm = normal_sum[cell].norm();
      if (norm <= 0.0) continue;  // opposing normals cancelled: leave neutral
      Vec3 n = normal_sum[cell] / norm;
      for (int c = 0; c < 3; ++c) out.image.at(c + 1, row, col) = static_cast<float>(0.5 * (n[c] + 1.0));
    }
  }
  return out;
}

}  // namespace qd
