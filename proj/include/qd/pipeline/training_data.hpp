#pragma once

#include <filesystem>
#include <vector>

#include "qd/nn/train.hpp"
#include "qd/pipeline/dataset.hpp"
#include "qd/pipeline/detector.hpp"

namespace qd {

// Proposal-network examples: the three-view image of a sampled point and its
// label vector. Clouds are preprocessed once; crops are cut on demand.
class RotDataset : public nn::Dataset {
 public:
  RotDataset(const std::filesystem::path& dir, const Manifest& manifest, Split split, const RunConfig& cfg);

  std::size_t size() const override { return records_.size(); }
  std::array<int, 3> input_shape() const override { return {3, kImageSize, kImageSize}; }
  int target_size() const override { return grid_size_; }
  void load(std::size_t index, std::span<float> input, std::span<float> target) const override;

  // Cloud index and label vector of an example.
  std::size_t cloud_of(std::size_t index) const { return records_[index].cloud; }
  const LabelVector& labels(std::size_t index) const { return records_[index].labels; }
  const PreparedCloud& cloud(std::size_t c) const { return clouds_[c]; }
  std::size_t cloud_count() const { return clouds_.size(); }
  double base_rate() const;

 private:
  struct Record {
    std::size_t cloud = 0;
    Vec3 point = Vec3::Zero();
    LabelVector labels;
  };
  int grid_size_ = 0;
  std::vector<PreparedCloud> clouds_;
  std::vector<Record> records_;
};

// Classifier examples: the grasp descriptor of a refined pose and its label.
class GcDataset : public nn::Dataset {
 public:
  GcDataset(const std::filesystem::path& dir, const Manifest& manifest, Split split, const RunConfig& cfg,
            int image_size = kImageSize);

  std::size_t size() const override { return records_.size(); }
  std::array<int, 3> input_shape() const override { return {4, image_size_, image_size_}; }
  int target_size() const override { return 1; }
  void load(std::size_t index, std::span<float> input, std::span<float> target) const override;

  double positive_rate() const;

 private:
  struct Record {
    std::size_t cloud = 0;
    Pose pose;
    bool label = false;
  };
  HandGeometry hand_;
  int image_size_ = kImageSize;
  std::vector<PointCloud> clouds_;
  std::vector<Record> records_;
};

}  // namespace qd
