#pragma once

#include <vector>

#include "vacgan/models.hpp"
#include "vacgan/tensor.hpp"

namespace vacgan {

// Uniform quadrature/histogram grid over 1 or 2 axes.
struct Grid {
  struct Axis {
    double lo = 0.0, hi = 1.0;
    std::size_t n = 1;
    double width() const { return (hi - lo) / static_cast<double>(n); }
  };
  std::vector<Axis> axes;

  std::size_t dim() const { return axes.size(); }
  std::size_t cells() const;
  double cell_measure() const;
  // Midpoint of a flat cell index (row-major over axes).
  void midpoint(std::size_t cell, double* out) const;
  // Flat cell index for a point; -1 when outside the grid.
  long cell_of(const double* x) const;
};

struct GaussComponent {
  double weight = 1.0;
  double mean[2] = {0.0, 0.0};
  double var[2] = {1.0, 1.0};  // diagonal variances
  double cov = 0.0;            // off-diagonal covariance (2D only)
};

// Evaluable probability density over R^1 or R^2.
class Density {
 public:
  enum class Kind { gaussian, gaussian_mixture, histogram };

  static Density gaussian1d(double mean, double sigma);
  static Density gaussian2d(double mx, double my, double vx, double vy, double cov = 0.0);
  static Density mixture(std::vector<GaussComponent> components, int dim);
  // Histogram over the given grid; masses normalized to sum 1.
  static Density histogram(Grid bins, std::vector<double> masses);
  // Histogram of samples (n,) as (n,1) or (n,dim) tensor over the grid.
  static Density from_samples(const Tensor& samples, const Grid& bins);

  double operator()(const double* x) const;
  double operator()(double x) const { return (*this)(&x); }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<GaussComponent>& components() const { return components_; }

  // Grid extending 9 sigma beyond every component (gaussian kinds) or the bin
  // range (histogram); covers all but a negligible tail of the mass.
  Grid default_grid(std::size_t points_per_axis) const;

 private:
  Kind kind_ = Kind::gaussian;
  int dim_ = 1;
  std::vector<GaussComponent> components_;
  Grid bins_;
  std::vector<double> masses_;
};

// Merge of the densities' default grids.
Grid grid_for(const Density& p, const Density& q, std::size_t points_per_axis);

// Bayes posterior p1/(p1+p2); throws ZeroDensity when both vanish.
double optimal_classifier(const Density& p1, const Density& p2, const double* x);

// Midpoint quadrature of p*log(p/q); throws InfiniteDivergence when p has
// mass where q vanishes.
double kl(const Density& p, const Density& q, const Grid& grid);

// 0.5*KL(p1||m) + 0.5*KL(p2||m) with m the equal mixture; in [0, log 2].
double jsd(const Density& p1, const Density& p2, const Grid& grid);

// Cross-entropy of the optimal classifier; equals log4 - 2*jsd.
double ce_of_optimal_classifier(const Density& p1, const Density& p2, const Grid& grid);

// JSD between histogram estimates of the two sample sets.
double empirical_jsd(const Tensor& samples1, const Tensor& samples2, const Grid& bins);

// Rice-rule bin count over the pooled sample range (1D or 2D samples).
Grid rice_grid(const Tensor& samples1, const Tensor& samples2);

// Max over grid midpoints of |C(x) - p1/(p1+p2)|; cells where both densities
// vanish are skipped.
double verify_proposition1(const Density& p1, const Density& p2, const Model& classifier,
                           const Grid& grid);

// Dense-scan argmax of f -> m*log(f) + n*log(1-f) over f in (0,1).
double bce_kernel_argmax_scan(double m, double n, std::size_t resolution);

}  // namespace vacgan
