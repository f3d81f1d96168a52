#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "qd/error.hpp"
#include "qd/hand/orientation_grid.hpp"
#include "qd/nn/network.hpp"

namespace qd::nn {

// Weight file contents. Layout (little-endian):
//   "GFNN", u32 version,
//   u32 in_channels, in_height, in_width, u32 layer count, per layer u32 kind, out, kernel,
//   u32 has_grid [, u32 num_axes, num_rolls, f64 cap_half_angle_deg, roll_step_deg],
//   u64 parameter count, f32 parameters in declaration order.
struct ModelFile {
  NetworkSpec spec;
  std::optional<GridParams> grid;  // orientation grid scored by a proposal network
  std::vector<float> params;
};

inline constexpr std::uint32_t kModelFileVersion = 1;

void save_model(const std::filesystem::path& path, const ModelFile& model);
// Throws FormatError on a bad magic, unknown version, inconsistent spec or
// truncated payload.
ModelFile load_model(const std::filesystem::path& path);

template <typename T>
ModelFile to_model_file(const Network<T>& net, std::optional<GridParams> grid = std::nullopt) {
  ModelFile m{net.spec(), grid, {}};
  m.params.reserve(net.params().size());
  for (T v : net.params()) m.params.push_back(static_cast<float>(v));
  return m;
}

template <typename T>
Network<T> make_network(const ModelFile& model) {
  Network<T> net(model.spec);
  if (net.params().size() != model.params.size()) throw ModelMismatch("parameter count does not match the spec");
  std::copy(model.params.begin(), model.params.end(), net.params().begin());
  return net;
}

}  // namespace qd::nn
