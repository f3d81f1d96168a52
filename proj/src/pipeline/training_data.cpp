#include "qd/pipeline/training_data.hpp"

#include "qd/encode/grasp_descriptor.hpp"
#include "qd/error.hpp"
#include "qd/geom/io.hpp"

namespace qd {

RotDataset::RotDataset(const std::filesystem::path& dir, const Manifest& manifest, Split split,
                       const RunConfig& cfg)
    : grid_size_(manifest.grid.size()) {
  for (const ViewRecord& v : manifest.views) {
    if (!in_split(manifest, v, split)) continue;
    auto rot = read_rot_labels(dir / v.rot_file, static_cast<std::size_t>(grid_size_));
    if (rot.empty()) continue;
    clouds_.push_back(prepare_cloud(read_ply(dir / v.cloud_file), cfg));
    for (RotRecord& r : rot) records_.push_back({clouds_.size() - 1, r.point, std::move(r.labels)});
  }
}

void RotDataset::load(std::size_t index, std::span<float> input, std::span<float> target) const {
  const Record& r = records_.at(index);
  Image img = proposal_input(clouds_[r.cloud], r.point);
  if (input.size() != img.size() || target.size() != r.labels.size())
    throw ShapeMismatch("RotDataset: buffer sizes do not match");
  std::copy(img.data.begin(), img.data.end(), input.begin());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = r.labels.get(i) ? 1.0f : 0.0f;
}

double RotDataset::base_rate() const {
  std::size_t pos = 0, total = 0;
  for (const Record& r : records_) {
    pos += r.labels.count();
    total += r.labels.size();
  }
  return total ? static_cast<double>(pos) / static_cast<double>(total) : 0.0;
}

GcDataset::GcDataset(const std::filesystem::path& dir, const Manifest& manifest, Split split, const RunConfig& cfg,
                     int image_size)
    : hand_(cfg.hand), image_size_(image_size) {
  for (const ViewRecord& v : manifest.views) {
    if (!in_split(manifest, v, split)) continue;
    auto gc = read_gc_labels(dir / v.gc_file);
    if (gc.empty()) continue;
    PointCloud cloud = read_ply(dir / v.cloud_file);
    if (!cloud.has_normals()) cloud = estimate_normals(cloud, cfg.normals).cloud;
    clouds_.push_back(std::move(cloud));
    for (const GcRecord& g : gc) records_.push_back({clouds_.size() - 1, g.pose, g.label});
  }
}

void GcDataset::load(std::size_t index, std::span<float> input, std::span<float> target) const {
  const Record& r = records_.at(index);
  GraspDescriptor d = grasp_descriptor(clouds_[r.cloud], r.pose, hand_, image_size_);
  if (input.size() != d.image.size() || target.size() != 1) throw ShapeMismatch("GcDataset: buffer sizes do not match");
  std::copy(d.image.data.begin(), d.image.data.end(), input.begin());
  target[0] = r.label ? 1.0f : 0.0f;
}

double GcDataset::positive_rate() const {
  std::size_t pos = 0;
  for (const Record& r : records_) pos += r.label ? 1 : 0;
  return records_.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(records_.size());
}

}  // namespace qd
