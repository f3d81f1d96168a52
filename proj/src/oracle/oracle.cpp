#include "qd/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>

#include "qd/error.hpp"
#include "qd/geom/sampling.hpp"

namespace qd {

void OracleConfig::validate() const {
  if (!(friction_coeff > 0.0)) throw InvalidArgument("OracleConfig: friction coefficient must be positive");
  if (!(contact_distance > 0.0)) throw InvalidArgument("OracleConfig: contact distance must be positive");
  if (votes < 1 || vote_threshold < 0 || vote_threshold > votes)
    throw InvalidArgument("OracleConfig: need 0 <= vote_threshold <= votes");
  if (perturb_angle_deg < 0.0 || perturb_translation < 0.0)
    throw InvalidArgument("OracleConfig: negative perturbation");
}

double OracleConfig::cone_cosine() const { return 1.0 / std::sqrt(1.0 + friction_coeff * friction_coeff); }

std::size_t LabelVector::count() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

std::string LabelVector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::vector<int> nibbles((bits_.size() + 3) / 4, 0);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) nibbles[i / 4] |= 8 >> (i % 4);
  std::string out;
  out.reserve(nibbles.size());
  for (int v : nibbles) out.push_back(kDigits[v]);
  return out;
}

LabelVector LabelVector::from_hex(const std::string& hex, std::size_t size) {
  if (hex.size() != (size + 3) / 4) throw FormatError("label hex has wrong length");
  LabelVector v(size);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    char c = hex[d];
    int value;
    if (c >= '0' && c <= '9')
      value = c - '0';
    else if (c >= 'a' && c <= 'f')
      value = c - 'a' + 10;
    else
      throw FormatError("label hex: bad digit");
    for (int b = 0; b < 4; ++b) {
      std::size_t i = d * 4 + b;
      bool bit = (value & (8 >> b)) != 0;
      if (i >= size) {
        if (bit) throw FormatError("label hex: padding bits set");
        continue;
      }
      v.set(i, bit);
    }
  }
  return v;
}

namespace {

struct RegionPoint {
  double x;   // closing-axis coordinate
  double cx;  // normal component along the closing axis
};

// Closing-region summary: extent along the closing axis plus the points
// whose normal lies in either friction cone.
struct Region {
  double cos_cone = 1.0;
  double lo = 0.0, hi = 0.0;
  std::size_t count = 0;
  std::vector<RegionPoint> cone_points;

  void reset(double cone_cosine) {
    cos_cone = cone_cosine;
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    count = 0;
    cone_points.clear();
  }

  void add(double x, double cx) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    ++count;
    if (cx >= cos_cone || cx <= -cos_cone) cone_points.push_back({x, cx});
  }
};

// Fingers close on the outermost region points; a contact on each side
// needs its normal inside the friction cone around that finger's push direction.
bool antipodal_region(const Region& region, const OracleConfig& cfg) {
  if (region.count == 0) return false;
  bool pos = false, neg = false;
  for (const RegionPoint& p : region.cone_points) {
    if (!pos && p.x >= region.hi - cfg.contact_distance && p.cx >= region.cos_cone) pos = true;
    if (!neg && p.x <= region.lo + cfg.contact_distance && p.cx <= -region.cos_cone) neg = true;
    if (pos && neg) return true;
  }
  return false;
}

struct HandBounds {
  double half_a, outer, half_h, half_l, back;

  explicit HandBounds(const HandGeometry& hand)
      : half_a(0.5 * hand.max_aperture),
        outer(half_a + hand.finger_thickness),
        half_h(0.5 * hand.hand_height),
        half_l(0.5 * hand.finger_length),
        back(-half_l - hand.base_depth) {}
};

// Scans points [begin, end). Every hand box lies in the slab |y| <= h/2, so
// points outside it are skipped after one dot product. Returns false as soon
// as a point lies strictly inside the hand when `check_collision` is set.
bool scan_range(const std::vector<Vec3>& pts, const std::vector<Vec3>& nrm, std::size_t begin, std::size_t end,
                const Pose& pose, const HandBounds& hb, bool check_collision, Region& region) {
  const Mat3& r = pose.rotation();
  const Vec3 c = r.col(0), b = r.col(1), a = r.col(2);
  const Vec3& t = pose.translation();
  for (std::size_t i = begin; i < end; ++i) {
    const Vec3 d = pts[i] - t;
    const double ay = std::abs(d.dot(b));
    if (!(ay <= hb.half_h)) continue;
    const double x = d.dot(c);
    const double z = d.dot(a);
    const double ax = std::abs(x);
    if (check_collision && ay < hb.half_h && ax < hb.outer) {
      const bool finger = ax > hb.half_a && z > -hb.half_l && z < hb.half_l;
      const bool base = z > hb.back && z < -hb.half_l;
      if (finger || base) return false;
    }
    if (ax <= hb.half_a && std::abs(z) <= hb.half_l) region.add(x, nrm[i].dot(c));
  }
  return true;
}

bool scan_surface(const PointCloud& surface, const Pose& pose, const HandGeometry& hand, bool check_collision,
                  Region& region) {
  if (!surface.has_normals()) throw InvalidArgument("antipodal: surface normals required");
  return scan_range(surface.points, *surface.normals, 0, surface.size(), pose, HandBounds(hand), check_collision,
                    region);
}

// Tree queries run two passes: a collision pass over nodes touching a finger
// or the base, then a region pass over nodes touching the closing region.
bool scan_buckets(const LabelSurface& surface, const Pose& pose, const HandGeometry& hand, bool check_collision,
                  Region& region) {
  const HandBounds hb(hand);
  const Mat3 rt = pose.rotation().transpose();
  const Mat3 abs_rt = rt.cwiseAbs();
  const Vec3& t = pose.translation();
  constexpr double kSlack = 1e-9;
  const PointCloud& cloud = surface.cloud();
  const std::vector<Vec3>& pts = cloud.points;
  const auto& nodes = surface.nodes();
  if (nodes.empty()) return true;
  thread_local std::vector<std::int32_t> stack;

  auto traverse = [&](auto&& overlaps, auto&& leaf) {
    stack.assign(1, 0);
    while (!stack.empty()) {
      const LabelSurface::Node& n = nodes[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      const Vec3 cl = rt * (n.center - t);
      const Vec3 e = abs_rt * n.half_extents + Vec3::Constant(kSlack);
      if (std::abs(cl.y()) - e.y() > hb.half_h || !overlaps(cl, e)) continue;
      if (n.left >= 0) {
        stack.push_back(n.right);
        stack.push_back(n.left);
      } else if (!leaf(n)) {
        return false;
      }
    }
    return true;
  };

  if (check_collision) {
    const Vec3 c = pose.rotation().col(0), b = pose.rotation().col(1), a = pose.rotation().col(2);
    const bool clear = traverse(
        [&](const Vec3& cl, const Vec3& e) {
          const double lo_x = std::abs(cl.x()) - e.x(), hi_x = std::abs(cl.x()) + e.x();
          if (lo_x > hb.outer) return false;
          const bool finger = hi_x > hb.half_a && std::abs(cl.z()) - e.z() < hb.half_l;
          const bool base = cl.z() + e.z() > hb.back && cl.z() - e.z() < -hb.half_l;
          return finger || base;
        },
        [&](const LabelSurface::Node& n) {
          for (std::size_t i = n.begin; i < n.end; ++i) {
            const Vec3 d = pts[i] - t;
            const double ay = std::abs(d.dot(b));
            if (!(ay < hb.half_h)) continue;
            const double ax = std::abs(d.dot(c));
            if (!(ax < hb.outer)) continue;
            const double z = d.dot(a);
            const bool finger = ax > hb.half_a && z > -hb.half_l && z < hb.half_l;
            const bool base = z > hb.back && z < -hb.half_l;
            if (finger || base) return false;
          }
          return true;
        });
    if (!clear) return false;
  }
  traverse(
      [&](const Vec3& cl, const Vec3& e) {
        return std::abs(cl.x()) - e.x() <= hb.half_a && std::abs(cl.z()) - e.z() <= hb.half_l;
      },
      [&](const LabelSurface::Node& n) {
        return scan_range(pts, *cloud.normals, n.begin, n.end, pose, hb, false, region);
      });
  return true;
}

}  // namespace

LabelSurface::LabelSurface(const PointCloud& surface, std::size_t bucket_size) {
  if (!surface.has_normals()) throw InvalidArgument("LabelSurface: surface normals required");
  if (bucket_size == 0) throw InvalidArgument("LabelSurface: bucket size must be positive");
  std::vector<std::size_t> order(surface.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto bounds = [&](std::size_t lo, std::size_t hi, Vec3& mn, Vec3& mx) {
    mn = Vec3::Constant(std::numeric_limits<double>::infinity());
    mx = -mn;
    for (std::size_t i = lo; i < hi; ++i) {
      mn = mn.cwiseMin(surface.points[order[i]]);
      mx = mx.cwiseMax(surface.points[order[i]]);
    }
  };
  // Median splits on the widest axis until nodes hold at most bucket_size points.
  auto build = [&](auto&& self, std::size_t lo, std::size_t hi) -> std::int32_t {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    Vec3 mn, mx;
    bounds(lo, hi, mn, mx);
    nodes_.push_back({0.5 * (mn + mx), 0.5 * (mx - mn), lo, hi, -1, -1});
    if (hi - lo > bucket_size) {
      int axis = 0;
      (mx - mn).maxCoeff(&axis);
      const std::size_t mid = lo + (hi - lo) / 2;
      std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(mid),
                       order.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t p, std::size_t q) {
                         const double vp = surface.points[p](axis), vq = surface.points[q](axis);
                         return vp < vq || (vp == vq && p < q);
                       });
      const std::int32_t left = self(self, lo, mid);
      const std::int32_t right = self(self, mid, hi);
      nodes_[static_cast<std::size_t>(id)].left = left;
      nodes_[static_cast<std::size_t>(id)].right = right;
    }
    return id;
  };
  if (!order.empty()) build(build, 0, order.size());
  cloud_.viewpoint = surface.viewpoint;
  cloud_.normals.emplace();
  cloud_.points.reserve(surface.size());
  cloud_.normals->reserve(surface.size());
  for (std::size_t i : order) {
    cloud_.points.push_back(surface.points[i]);
    cloud_.normals->push_back((*surface.normals)[i]);
  }
}

bool antipodal(const PointCloud& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg) {
  if (surface.empty()) return false;
  thread_local Region region;
  region.reset(cfg.cone_cosine());
  scan_surface(surface, pose, hand, false, region);
  return antipodal_region(region, cfg);
}

bool antipodal(const LabelSurface& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg) {
  thread_local Region region;
  region.reset(cfg.cone_cosine());
  scan_buckets(surface, pose, hand, false, region);
  return antipodal_region(region, cfg);
}

bool grasp_label(const PointCloud& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg) {
  if (surface.empty()) return false;
  thread_local Region region;
  region.reset(cfg.cone_cosine());
  if (!scan_surface(surface, pose, hand, true, region)) return false;
  return antipodal_region(region, cfg);
}

bool grasp_label(const LabelSurface& surface, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg) {
  thread_local Region region;
  region.reset(cfg.cone_cosine());
  if (!scan_buckets(surface, pose, hand, true, region)) return false;
  return antipodal_region(region, cfg);
}

bool grasp_label(const SceneSample& scene, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg) {
  return grasp_label(scene.dense_surface, pose, hand, cfg);
}

bool majority_vote(std::span<const bool> outcomes, int threshold) {
  int positives = 0;
  for (bool b : outcomes) positives += b ? 1 : 0;
  return positives >= threshold;
}

Pose apply_perturbation(const Pose& pose, const Pose& perturbation) {
  return Pose(perturbation.rotation() * pose.rotation(), pose.translation() + perturbation.translation());
}

bool robust_label(const std::function<bool(const Pose&)>& evaluate, const Pose& pose, const OracleConfig& cfg,
                  Rng& rng) {
  cfg.validate();
  auto outcomes = std::make_unique<bool[]>(static_cast<std::size_t>(cfg.votes));
  outcomes[0] = evaluate(pose);
  for (int k = 1; k < cfg.votes; ++k) {
    Pose delta = random_perturbation(rng, cfg.perturb_angle_deg, cfg.perturb_translation);
    outcomes[k] = evaluate(apply_perturbation(pose, delta));
  }
  return majority_vote(std::span<const bool>(outcomes.get(), static_cast<std::size_t>(cfg.votes)), cfg.vote_threshold);
}

bool robust_label(const SceneSample& scene, const Pose& pose, const HandGeometry& hand, const OracleConfig& cfg,
                  Rng& rng) {
  return robust_label([&](const Pose& p) { return grasp_label(scene.dense_surface, p, hand, cfg); }, pose, cfg, rng);
}

LabelVector label_vector(const PointCloud& observed, const LabelSurface& surface, const Vec3& sample,
                         const OrientationGrid& grid, const Mat3& grid_to_world, const HandGeometry& hand,
                         const OracleConfig& cfg, double push_step) {
  LabelVector labels(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    Pose pose = grasp_pose(sample, grid, i, hand, grid_to_world);
    auto pushed = push_forward(observed, pose, hand, push_step);
    if (pushed && grasp_label(surface, *pushed, hand, cfg)) labels.set(static_cast<std::size_t>(i), true);
  }
  return labels;
}

LabelVector label_vector(const PointCloud& observed, const PointCloud& surface, const Vec3& sample,
                         const OrientationGrid& grid, const Mat3& grid_to_world, const HandGeometry& hand,
                         const OracleConfig& cfg, double push_step) {
  return label_vector(observed, LabelSurface(surface), sample, grid, grid_to_world, hand, cfg, push_step);
}

LabelVector label_vector(const SceneSample& scene, const Vec3& sample, const OrientationGrid& grid,
                         const Mat3& grid_to_world, const HandGeometry& hand, const OracleConfig& cfg) {
  return label_vector(scene.cloud, scene.dense_surface, sample, grid, grid_to_world, hand, cfg);
}

}  // namespace qd
