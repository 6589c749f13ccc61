#include "vacgan/metrics.hpp"

#include <cmath>
#include <sstream>

namespace vacgan {

namespace {

void require_dims(const Image& f, const Image& g) {
  if (f.width != g.width || f.height != g.height || f.width == 0 || f.height == 0) {
    throw DimensionMismatch("image dimensions " + std::to_string(f.width) + "x" +
                            std::to_string(f.height) + " vs " + std::to_string(g.width) + "x" +
                            std::to_string(g.height));
  }
}

}  // namespace

Image Image::from_tensor(const Tensor& t) {
  Image img;
  if (t.rank() == 2) {
    img.height = t.shape()[0];
    img.width = t.shape()[1];
  } else if (t.rank() == 3 && t.shape()[0] == 1) {
    img.height = t.shape()[1];
    img.width = t.shape()[2];
  } else {
    throw DimensionMismatch("image tensor must be (h,w) or (1,h,w), got " +
                            shape_str(t.shape()));
  }
  img.pixels.assign(t.data(), t.data() + t.size());
  for (auto& p : img.pixels) p = std::clamp(p, 0.0, 1.0);
  return img;
}

double mse(const Image& f, const Image& g) {
  require_dims(f, g);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.pixels.size(); ++i) {
    const double d = f.pixels[i] - g.pixels[i];
    acc += d * d;
  }
  return acc / static_cast<double>(f.pixels.size());
}

double rmse(const Image& f, const Image& g) { return std::sqrt(mse(f, g)); }

double mae(const Image& f, const Image& g) {
  require_dims(f, g);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.pixels.size(); ++i) acc += std::fabs(f.pixels[i] - g.pixels[i]);
  return acc / static_cast<double>(f.pixels.size());
}

double uqi(const Image& f, const Image& g, std::size_t window) {
  require_dims(f, g);
  if (window == 0 || window > f.width || window > f.height) {
    throw DimensionMismatch("uqi window " + std::to_string(window) + " exceeds image");
  }
  const double wn = static_cast<double>(window * window);
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t y = 0; y + window <= f.height; ++y) {
    for (std::size_t x = 0; x + window <= f.width; ++x) {
      double sf = 0.0, sg = 0.0, sff = 0.0, sgg = 0.0, sfg = 0.0;
      for (std::size_t dy = 0; dy < window; ++dy)
        for (std::size_t dx = 0; dx < window; ++dx) {
          const double a = f.at(y + dy, x + dx);
          const double b = g.at(y + dy, x + dx);
          sf += a;
          sg += b;
          sff += a * a;
          sgg += b * b;
          sfg += a * b;
        }
      const double mf = sf / wn, mg = sg / wn;
      const double vf = sff / wn - mf * mf;
      const double vg = sgg / wn - mg * mg;
      const double cfg = sfg / wn - mf * mg;
      const double denom = (vf + vg) * (mf * mf + mg * mg);
      if (denom < 1e-12) continue;
      acc += 4.0 * cfg * (mf * mg) / denom;
      ++used;
    }
  }
  if (used == 0) throw AllWindowsDegenerate("every UQI window excluded");
  return acc / static_cast<double>(used);
}

double ssim(const Image& f, const Image& g) {
  require_dims(f, g);
  const std::size_t window = std::min<std::size_t>(11, std::min(f.width, f.height));
  const double sigma = 1.5;
  std::vector<double> kernel(window * window);
  {
    const double c = (static_cast<double>(window) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t y = 0; y < window; ++y)
      for (std::size_t x = 0; x < window; ++x) {
        const double dy = static_cast<double>(y) - c;
        const double dx = static_cast<double>(x) - c;
        kernel[y * window + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        total += kernel[y * window + x];
      }
    for (auto& k : kernel) k /= total;
  }
  constexpr double kL = 1.0;
  constexpr double c1 = (0.01 * kL) * (0.01 * kL);
  constexpr double c2 = (0.03 * kL) * (0.03 * kL);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t y = 0; y + window <= f.height; ++y) {
    for (std::size_t x = 0; x + window <= f.width; ++x) {
      double mf = 0.0, mg = 0.0, sff = 0.0, sgg = 0.0, sfg = 0.0;
      for (std::size_t dy = 0; dy < window; ++dy)
        for (std::size_t dx = 0; dx < window; ++dx) {
          const double w = kernel[dy * window + dx];
          const double a = f.at(y + dy, x + dx);
          const double b = g.at(y + dy, x + dx);
          mf += w * a;
          mg += w * b;
          sff += w * (a * a);
          sgg += w * (b * b);
          sfg += w * (a * b);
        }
      const double vf = sff - mf * mf;
      const double vg = sgg - mg * mg;
      const double cfg = sfg - mf * mg;
      acc += ((2.0 * (mf * mg) + c1) * (2.0 * cfg + c2)) /
             ((mf * mf + mg * mg + c1) * (vf + vg + c2));
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

MetricReport pairwise_report(const std::vector<Image>& set_a, const std::vector<Image>& set_b) {
  if (set_a.size() < 2 || set_b.size() < 2) {
    throw NoPairs("intra-class aggregates need at least two images per set");
  }
  using MetricFn = double (*)(const Image&, const Image&);
  const MetricFn fns[5] = {
      mse, rmse, mae, [](const Image& f, const Image& g) { return uqi(f, g, 8); }, ssim};

  MetricReport report;
  const auto intra = [&](const std::vector<Image>& set, int which) {
    std::array<double, 5> acc{};
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j) {
        for (int m = 0; m < 5; ++m) {
          try {
            acc[static_cast<std::size_t>(m)] += fns[m](set[i], set[j]);
          } catch (const Error& e) {
            throw Error("pair (" + std::to_string(i) + "," + std::to_string(j) + ") of " +
                        kMetricNames[static_cast<std::size_t>(m)] + ": " + e.what());
          }
        }
        ++pairs;
      }
    for (int m = 0; m < 5; ++m) {
      auto& row = report.rows[static_cast<std::size_t>(m)];
      const double v = acc[static_cast<std::size_t>(m)] / static_cast<double>(pairs);
      (which == 0 ? row.intra_class_a : row.intra_class_b) = v;
    }
  };
  intra(set_a, 0);
  intra(set_b, 1);

  std::array<double, 5> acc{};
  for (std::size_t i = 0; i < set_a.size(); ++i)
    for (std::size_t j = 0; j < set_b.size(); ++j) {
      for (int m = 0; m < 5; ++m) {
        try {
          acc[static_cast<std::size_t>(m)] += fns[m](set_a[i], set_b[j]);
        } catch (const Error& e) {
          throw Error("cross pair (" + std::to_string(i) + "," + std::to_string(j) + ") of " +
                      kMetricNames[static_cast<std::size_t>(m)] + ": " + e.what());
        }
      }
    }
  const double cross = static_cast<double>(set_a.size() * set_b.size());
  for (int m = 0; m < 5; ++m) {
    report.rows[static_cast<std::size_t>(m)].inter_class =
        acc[static_cast<std::size_t>(m)] / cross;
  }
  return report;
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "metric,intra_class_a,intra_class_b,inter_class\n";
  for (std::size_t m = 0; m < 5; ++m) {
    os << kMetricNames[m] << "," << rows[m].intra_class_a << "," << rows[m].intra_class_b << ","
       << rows[m].inter_class << "\n";
  }
  return os.str();
}

MetricReport MetricReport::from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "metric,intra_class_a,intra_class_b,inter_class") {
    throw BadFormat("bad metric report header");
  }
  MetricReport report;
  std::size_t seen = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string name, a, b, c;
    if (!std::getline(row, name, ',') || !std::getline(row, a, ',') ||
        !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw BadFormat("bad metric report row: " + line);
    }
    bool matched = false;
    for (std::size_t m = 0; m < 5; ++m) {
      if (name == kMetricNames[m]) {
        report.rows[m] = {std::stod(a), std::stod(b), std::stod(c)};
        matched = true;
        ++seen;
      }
    }
    if (!matched) throw BadFormat("unknown metric in report: " + name);
  }
  if (seen != 5) throw BadFormat("metric report missing rows");
  return report;
}

}  // namespace vacgan
