#pragma once

#include <array>
#include <string>
#include <vector>

#include "vacgan/tensor.hpp"

namespace vacgan {

// Grayscale image with pixels in [0,1].
struct Image {
  std::size_t width = 0, height = 0;
  std::vector<double> pixels;  // row-major

  static Image from_tensor(const Tensor& t);  // (h,w) or (1,h,w)
  double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
};

double mse(const Image& f, const Image& g);
double rmse(const Image& f, const Image& g);
double mae(const Image& f, const Image& g);

// Universal quality index, mean over sliding windows; windows whose
// denominator is below 1e-12 are excluded from the mean.
double uqi(const Image& f, const Image& g, std::size_t window = 8);

// Mean local SSIM with Gaussian window (side 11, sigma 1.5), C1=(0.01L)^2,
// C2=(0.03L)^2, L=1. The window shrinks to fit images smaller than 11.
double ssim(const Image& f, const Image& g);

inline constexpr std::array<const char*, 5> kMetricNames = {"mse", "rmse", "mae", "uqi",
                                                            "ssim"};

// Three aggregates per metric: mean over unordered pairs within set A, within
// set B, and over the full A x B cross product.
struct MetricReport {
  struct Row {
    double intra_class_a = 0.0;
    double intra_class_b = 0.0;
    double inter_class = 0.0;
  };
  std::array<Row, 5> rows;  // indexed as kMetricNames

  std::string to_csv() const;
  static MetricReport from_csv(const std::string& text);
};

MetricReport pairwise_report(const std::vector<Image>& set_a, const std::vector<Image>& set_b);

}  // namespace vacgan
