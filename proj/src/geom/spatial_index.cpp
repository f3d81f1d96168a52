#include "qd/geom/spatial_index.hpp"

#include <algorithm>
#include <numeric>
#include <limits>
#include <queue>

namespace qd {

SpatialIndex::SpatialIndex(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), order_(points.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / std::max<std::size_t>(leaf_size, 1) + 1);
    build(0, points_.size(), std::max<std::size_t>(leaf_size, 1));
  }
}

std::size_t SpatialIndex::build(std::size_t begin, std::size_t end, std::size_t leaf_size) {
  std::size_t id = nodes_.size();
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident: keep as leaf

  std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
  double split = points_[order_[mid]][axis];
  std::size_t left = build(begin, mid, leaf_size);
  std::size_t right = build(mid, end, leaf_size);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::size_t> SpatialIndex::radius_search(const Vec3& center, double radius) const {
  std::vector<std::size_t> out;
  if (nodes_.empty() || radius < 0.0) return out;
  const double r2 = radius * radius;
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[stack.back()];
    stack.pop_back();
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i)
        if ((points_[order_[i]] - center).squaredNorm() <= r2) out.push_back(order_[i]);
      continue;
    }
    double d = center[n.axis] - n.split;
    // Left holds values <= split, right holds values >= split.
    if (d <= radius) stack.push_back(n.left);
    if (d >= -radius) stack.push_back(n.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> SpatialIndex::knn_search(const Vec3& query, std::size_t k) const {
  k = std::min(k, points_.size());
  if (k == 0) return {};
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;  // max-heap of the current best k
  auto worst = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first; };

  std::vector<std::pair<std::size_t, double>> stack{{0, 0.0}};
  while (!stack.empty()) {
    auto [id, bound] = stack.back();
    stack.pop_back();
    if (bound > worst()) continue;
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        Entry e{(points_[order_[i]] - query).squaredNorm(), order_[i]};
        if (heap.size() < k) {
          heap.push(e);
        } else if (e < heap.top()) {
          heap.pop();
          heap.push(e);
        }
      }
      continue;
    }
    double d = query[n.axis] - n.split;
    std::size_t near = d <= 0.0 ? n.left : n.right;
    std::size_t far = d <= 0.0 ? n.right : n.left;
    stack.push_back({far, std::max(bound, d * d)});
    stack.push_back({near, bound});
  }
  std::vector<Entry> best;
  best.reserve(heap.size());
  while (!heap.empty()) {
    best.push_back(heap.top());
    heap.pop();
  }
  std::sort(best.begin(), best.end());
  std::vector<std::size_t> out;
  out.reserve(best.size());
  for (const auto& e : best) out.push_back(e.second);
  return out;
}

std::size_t SpatialIndex::nearest(const Vec3& query) const { return knn_search(query, 1).front(); }

}  // namespace qd
