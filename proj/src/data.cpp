#include "vacgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vacgan {

DatasetKind dataset_kind_from_name(const std::string& name) {
  if (name == "two_gaussians") return DatasetKind::two_gaussians;
  if (name == "gaussian_ring_pair") return DatasetKind::gaussian_ring_pair;
  if (name == "procedural_glyphs") return DatasetKind::procedural_glyphs;
  if (name == "external") return DatasetKind::external;
  throw InvalidSpec("unknown dataset kind: " + name);
}

std::string dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::two_gaussians: return "two_gaussians";
    case DatasetKind::gaussian_ring_pair: return "gaussian_ring_pair";
    case DatasetKind::procedural_glyphs: return "procedural_glyphs";
    case DatasetKind::external: return "external";
  }
  return "?";
}

namespace {

// Filled disc (class 0) or filled axis-aligned square (class 1) with jittered
// center and size, rendered with a soft 1-pixel edge.
void render_glyph(double* pixels, std::size_t side, int label, Rng& rng) {
  const double s = static_cast<double>(side);
  const double cx = s / 2.0 + rng.uniform(-s / 8.0, s / 8.0);
  const double cy = s / 2.0 + rng.uniform(-s / 8.0, s / 8.0);
  const double r = s * rng.uniform(0.22, 0.34);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx;
      const double dy = static_cast<double>(y) + 0.5 - cy;
      const double dist = label == 0 ? std::sqrt(dx * dx + dy * dy)
                                     : std::max(std::fabs(dx), std::fabs(dy));
      pixels[y * side + x] = std::clamp(r - dist + 0.5, 0.0, 1.0);
    }
  }
}

}  // namespace

LabeledBatch generate(const DatasetSpec& spec, std::size_t n_per_class) {
  Rng rng(spec.seed);
  return sample_batch(spec, n_per_class, rng);
}

LabeledBatch sample_batch(const DatasetSpec& spec, std::size_t n_per_class, Rng& rng) {
  if (n_per_class < 1) throw InvalidSpec("n_per_class must be >= 1");
  LabeledBatch batch;
  const std::size_t n = 2 * n_per_class;
  switch (spec.kind) {
    case DatasetKind::two_gaussians: {
      batch.samples = Tensor({n, 2});
      for (std::size_t i = 0; i < n; ++i) {
        const int label = i < n_per_class ? 0 : 1;
        const double* mu = label == 0 ? spec.mu0 : spec.mu1;
        batch.samples.at2(i, 0) = mu[0] + spec.sigma * rng.normal();
        batch.samples.at2(i, 1) = mu[1] + spec.sigma * rng.normal();
        batch.labels.push_back(label);
      }
      break;
    }
    case DatasetKind::gaussian_ring_pair: {
      batch.samples = Tensor({n, 2});
      for (std::size_t i = 0; i < n; ++i) {
        const int label = i < n_per_class ? 0 : 1;
        const double radius = label == 0 ? spec.radius0 : spec.radius1;
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        const double r = radius + spec.ring_sigma * rng.normal();
        batch.samples.at2(i, 0) = r * std::cos(theta);
        batch.samples.at2(i, 1) = r * std::sin(theta);
        batch.labels.push_back(label);
      }
      break;
    }
    case DatasetKind::procedural_glyphs: {
      const std::size_t side = spec.image_side;
      if (side < 4) throw InvalidSpec("procedural_glyphs needs image_side >= 4");
      batch.samples = Tensor({n, 1, side, side});
      for (std::size_t i = 0; i < n; ++i) {
        const int label = i < n_per_class ? 0 : 1;
        render_glyph(batch.samples.data() + i * side * side, side, label, rng);
        batch.labels.push_back(label);
      }
      break;
    }
    case DatasetKind::external:
      throw InvalidSpec("external datasets go through load_external");
  }
  return batch;
}

Tensor read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw BadFormat(path + ": not a binary PGM (P5)");
  auto next_token = [&is, &path]() {
    std::string tok;
    while (is >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        continue;
      }
      return tok;
    }
    throw BadFormat(path + ": truncated header");
  };
  const std::size_t w = std::stoul(next_token());
  const std::size_t h = std::stoul(next_token());
  const unsigned long maxval = std::stoul(next_token());
  if (maxval != 255) throw BadFormat(path + ": only 8-bit PGM supported");
  is.get();  // single whitespace after maxval
  std::vector<unsigned char> raw(w * h);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!is) throw BadFormat(path + ": truncated pixel data");
  Tensor out({1, h, w});
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<double>(raw[i]) / 255.0;
  return out;
}

void write_pgm(const Tensor& image, const std::string& path) {
  std::size_t h = 0, w = 0;
  if (image.rank() == 2) {
    h = image.shape()[0];
    w = image.shape()[1];
  } else if (image.rank() == 3 && image.shape()[0] == 1) {
    h = image.shape()[1];
    w = image.shape()[2];
  } else {
    throw DimensionMismatch("write_pgm: need (h,w) or (1,h,w), got " + shape_str(image.shape()));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << "P5\n" << w << " " << h << "\n255\n";
  for (std::size_t i = 0; i < h * w; ++i) {
    const double v = std::clamp(image[i], 0.0, 1.0);
    os.put(static_cast<char>(std::lround(v * 255.0)));
  }
}

LabeledBatch load_external(const std::string& corpus_dir, const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream manifest(manifest_path);
  if (!manifest) throw IoError("cannot open manifest " + manifest_path);
  std::vector<Tensor> images;
  std::vector<int> labels;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw BadFormat("manifest line missing tab: " + line);
    const std::string rel = line.substr(0, tab);
    const std::string label_str = line.substr(tab + 1);
    if (label_str != "0" && label_str != "1") throw BadLabel("bad label: " + label_str);
    images.push_back(read_pgm((fs::path(corpus_dir) / rel).string()));
    labels.push_back(label_str == "1" ? 1 : 0);
  }
  if (images.empty()) throw BadLabel("manifest lists no samples");
  for (const auto& img : images) {
    if (!img.same_shape(images.front())) {
      throw BadFormat("corpus images disagree on dimensions");
    }
  }
  const std::size_t per = images.front().size();
  LabeledBatch batch;
  batch.samples = Tensor({images.size(), images.front().shape()[0], images.front().shape()[1],
                          images.front().shape()[2]});
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::copy(images[i].data(), images[i].data() + per, batch.samples.data() + i * per);
  }
  batch.labels = std::move(labels);
  return batch;
}

void write_points_csv(const LabeledBatch& batch, const std::string& path) {
  if (batch.samples.rank() != 2 || batch.samples.shape()[1] != 2) {
    throw DimensionMismatch("points CSV expects (n,2) samples");
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << "x,y,label\n";
  os.precision(17);
  for (std::size_t i = 0; i < batch.samples.shape()[0]; ++i) {
    os << batch.samples.at2(i, 0) << "," << batch.samples.at2(i, 1) << ","
       << batch.labels[i] << "\n";
  }
}

}  // namespace vacgan
