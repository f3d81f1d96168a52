#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

#include "qd/geom/types.hpp"

namespace qd {

// Counter-based 64-bit generator (SplitMix64 finalizer over key + counter).
//
// Streams are a pure function of the key and the draw index, so the same
// seed gives the same sequence on every platform. Child streams are keyed by
// (parent key, label): workers take `rng.child(worker_id)` and never share.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  Rng child(std::string_view label) const;
  Rng child(std::uint64_t index) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n); n > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);
  // Standard normal (Box-Muller, one value per call).
  double normal();
  // Uniform direction on the unit sphere.
  Vec3 unit_vector();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace qd
