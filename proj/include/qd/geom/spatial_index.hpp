#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qd/geom/types.hpp"

namespace qd {

// Balanced k-d tree over a fixed point set. Immutable after construction;
// concurrent queries are safe.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::span<const Vec3> points, std::size_t leaf_size = 8);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  // Indices with |p - center| <= radius, ascending.
  std::vector<std::size_t> radius_search(const Vec3& center, double radius) const;
  // The k nearest indices ordered by distance (ties broken by index).
  std::vector<std::size_t> knn_search(const Vec3& query, std::size_t k) const;
  std::size_t nearest(const Vec3& query) const;

 private:
  struct Node {
    std::size_t begin = 0, end = 0;  // range into order_
    int axis = -1;                   // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end, std::size_t leaf_size);

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace qd
