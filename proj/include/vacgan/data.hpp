#pragma once

#include <string>
#include <vector>

#include "vacgan/rng.hpp"
#include "vacgan/tensor.hpp"

namespace vacgan {

struct LabeledBatch {
  Tensor samples;           // (n, feature shape...)
  std::vector<int> labels;  // n entries in {0,1}
};

enum class DatasetKind { two_gaussians, gaussian_ring_pair, procedural_glyphs, external };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::two_gaussians;
  // two_gaussians
  double mu0[2] = {-2.0, 0.0};
  double mu1[2] = {2.0, 0.0};
  double sigma = 1.0;
  // gaussian_ring_pair
  double radius0 = 1.0;
  double radius1 = 2.5;
  double ring_sigma = 0.1;
  // procedural_glyphs
  std::size_t image_side = 8;
  // external
  std::string corpus_path;
  std::uint64_t seed = 0;
};

DatasetKind dataset_kind_from_name(const std::string& name);
std::string dataset_kind_name(DatasetKind kind);

// Balanced deterministic batch: n_per_class samples for each label.
LabeledBatch generate(const DatasetSpec& spec, std::size_t n_per_class);

// Same as generate() but draws from a caller-owned stream, for per-step
// minibatches inside a training loop.
LabeledBatch sample_batch(const DatasetSpec& spec, std::size_t n_per_class, Rng& rng);

// Loads binary PGM (P5, 8-bit) images listed in a tab-separated manifest of
// "relative-path<TAB>label" lines; pixels normalized to [0,1].
LabeledBatch load_external(const std::string& corpus_dir, const std::string& manifest_path);

// Minimal binary PGM (P5, 8-bit) support. Pixels are [0,1] doubles.
Tensor read_pgm(const std::string& path);                     // (1, h, w)
void write_pgm(const Tensor& image, const std::string& path); // (h, w) or (1, h, w)

void write_points_csv(const LabeledBatch& batch, const std::string& path);

}  // namespace vacgan
