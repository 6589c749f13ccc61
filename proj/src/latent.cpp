#include "vacgan/latent.hpp"

#include <cmath>

namespace vacgan {

Tensor sample_latent(const LatentSpec& spec, int class_label, std::size_t n, Rng& rng) {
  if (spec.dim == 0 || spec.partition_axis >= spec.dim) {
    throw InvalidConfig("bad latent spec: dim=" + std::to_string(spec.dim) +
                        " axis=" + std::to_string(spec.partition_axis));
  }
  if (class_label != 0 && class_label != 1) {
    throw InvalidConfig("class label must be 0 or 1");
  }
  Tensor out({n, spec.dim});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < spec.dim; ++d) out.at2(i, d) = rng.normal();
    double g = out.at2(i, spec.partition_axis);
    while (g == 0.0) g = rng.normal();
    out.at2(i, spec.partition_axis) = class_label == 0 ? -std::fabs(g) : std::fabs(g);
  }
  return out;
}

int classify_latent(const LatentSpec& spec, const Tensor& z) {
  if (z.size() < spec.dim) {
    throw ShapeMismatch("latent vector has " + std::to_string(z.size()) +
                        " coordinates, spec needs " + std::to_string(spec.dim));
  }
  const double v = z[spec.partition_axis];
  if (v == 0.0) throw Boundary("latent coordinate on the partition boundary");
  return v < 0.0 ? 0 : 1;
}

}  // namespace vacgan
