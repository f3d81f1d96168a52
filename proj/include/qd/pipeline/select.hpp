#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qd/geom/point_cloud.hpp"
#include "qd/hand/hand_geometry.hpp"
#include "qd/pipeline/cluster.hpp"
#include "qd/pipeline/config.hpp"
#include "qd/pipeline/detector.hpp"

namespace qd {

enum class SelectionTier { ClusterCenter = 0, ClusterMember = 1, AboveThreshold = 2, BelowThreshold = 3 };

struct RankedGrasp {
  Pose pose;
  SelectionTier tier = SelectionTier::BelowThreshold;
  double score = 0.0;      // detector score; mean member score for cluster centers
  double heuristic = 0.0;  // weighted normalized features
  std::optional<std::size_t> hypothesis;  // index into the hypothesis list
  std::optional<std::size_t> cluster;     // index into the cluster list
};

// Feature values of one grasp: height along `up`, cosine between the
// approach axis and -up, and the aperture the visible points need.
struct GraspFeatures {
  double height = 0.0;
  double verticality = 0.0;
  double aperture = 0.0;
};

GraspFeatures grasp_features(const Pose& pose, const PointCloud& cloud, const HandGeometry& hand, const Vec3& up);

// Candidates in the order a robot should try them: centers of clusters with
// at least two members, then those members, then grasps scoring above
// `score_threshold`, then the rest. Within a tier, features are min-max
// normalized over all candidates and ranked by their weighted sum. Grasps
// colliding with the cloud are dropped. Reachability filtering belongs to
// the caller and can be applied to the returned list in order.
std::vector<RankedGrasp> select_grasps(std::span<const GraspHypothesis> hyps, std::span<const GraspCluster> clusters,
                                       const PointCloud& cloud, const HandGeometry& hand,
                                       const SelectionWeights& weights, double score_threshold = 0.5,
                                       const Vec3& up = Vec3::UnitZ());

}  // namespace qd
