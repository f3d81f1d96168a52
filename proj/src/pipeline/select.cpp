#include "qd/pipeline/select.hpp"

#include <algorithm>
#include <limits>

#include "qd/hand/hand.hpp"

namespace qd {

GraspFeatures grasp_features(const Pose& pose, const PointCloud& cloud, const HandGeometry& hand, const Vec3& up) {
  GraspFeatures f;
  f.height = pose.translation().dot(up);
  f.verticality = -pose.rotation().col(2).dot(up);
  f.aperture = required_aperture(cloud.points, pose, hand);
  return f;
}

std::vector<RankedGrasp> select_grasps(std::span<const GraspHypothesis> hyps, std::span<const GraspCluster> clusters,
                                       const PointCloud& cloud, const HandGeometry& hand,
                                       const SelectionWeights& weights, double score_threshold, const Vec3& up) {
  std::vector<RankedGrasp> out;
  std::vector<bool> in_cluster(hyps.size(), false);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const GraspCluster& cl = clusters[c];
    if (cl.members.size() < 2) continue;
    double mean = 0.0;
    for (std::size_t i : cl.members) mean += hyps[i].score();
    RankedGrasp r;
    r.pose = cl.center;
    r.tier = SelectionTier::ClusterCenter;
    r.score = mean / static_cast<double>(cl.members.size());
    r.cluster = c;
    out.push_back(r);
    for (std::size_t i : cl.members) {
      RankedGrasp m;
      m.pose = hyps[i].pose;
      m.tier = SelectionTier::ClusterMember;
      m.score = hyps[i].score();
      m.hypothesis = i;
      m.cluster = c;
      out.push_back(m);
      in_cluster[i] = true;
    }
  }
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    if (in_cluster[i]) continue;
    RankedGrasp r;
    r.pose = hyps[i].pose;
    r.score = hyps[i].score();
    r.tier = r.score > score_threshold ? SelectionTier::AboveThreshold : SelectionTier::BelowThreshold;
    r.hypothesis = i;
    out.push_back(r);
  }

  std::erase_if(out, [&](const RankedGrasp& r) { return in_collision(cloud, r.pose, hand, hand.max_aperture); });

  std::vector<GraspFeatures> feats;
  feats.reserve(out.size());
  for (const RankedGrasp& r : out) feats.push_back(grasp_features(r.pose, cloud, hand, up));
  auto normalized = [&](double GraspFeatures::*field, std::size_t i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& f : feats) {
      lo = std::min(lo, f.*field);
      hi = std::max(hi, f.*field);
    }
    return hi > lo ? (feats[i].*field - lo) / (hi - lo) : 0.0;
  };
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].heuristic = weights.height * normalized(&GraspFeatures::height, i) +
                       weights.verticality * normalized(&GraspFeatures::verticality, i) +
                       weights.aperture * normalized(&GraspFeatures::aperture, i);

  std::stable_sort(out.begin(), out.end(), [](const RankedGrasp& a, const RankedGrasp& b) {
    if (a.tier != b.tier) return a.tier < b.tier;
    return a.heuristic > b.heuristic;
  });
  return out;
}

}  // namespace qd
