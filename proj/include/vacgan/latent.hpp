#pragma once

#include "vacgan/rng.hpp"
#include "vacgan/tensor.hpp"

namespace vacgan {

// Latent space partitioned into two half-spaces by the sign of one coordinate.
struct LatentSpec {
  std::size_t dim = 64;
  std::size_t partition_axis = 0;
  static constexpr int num_classes = 2;
};

// Draws n latent vectors for the given class. Coordinates are standard
// normal; the partition coordinate is folded to the class half-space, so its
// magnitude keeps the unconditional |z| distribution. Exact zeros on the
// partition coordinate are resampled.
Tensor sample_latent(const LatentSpec& spec, int class_label, std::size_t n, Rng& rng);

// 0 iff the partition coordinate is negative, 1 if positive.
// Throws Boundary for an exact zero.
int classify_latent(const LatentSpec& spec, const Tensor& z);

}  // namespace vacgan
