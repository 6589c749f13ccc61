#include "vacgan/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vacgan {

std::size_t Grid::cells() const {
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.n;
  return n;
}

double Grid::cell_measure() const {
  double m = 1.0;
  for (const auto& axis : axes) m *= axis.width();
  return m;
}

void Grid::midpoint(std::size_t cell, double* out) const {
  for (std::size_t d = axes.size(); d-- > 0;) {
    const auto& axis = axes[d];
    const std::size_t i = cell % axis.n;
    cell /= axis.n;
    out[d] = axis.lo + (static_cast<double>(i) + 0.5) * axis.width();
  }
}

long Grid::cell_of(const double* x) const {
  std::size_t flat = 0;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& axis = axes[d];
    if (x[d] < axis.lo || x[d] >= axis.hi) return -1;
    auto i = static_cast<std::size_t>((x[d] - axis.lo) / axis.width());
    if (i >= axis.n) i = axis.n - 1;
    flat = flat * axis.n + i;
  }
  return static_cast<long>(flat);
}

Density Density::gaussian1d(double mean, double sigma) {
  Density d;
  d.kind_ = Kind::gaussian;
  d.dim_ = 1;
  GaussComponent c;
  c.mean[0] = mean;
  c.var[0] = sigma * sigma;
  d.components_.push_back(c);
  return d;
}

Density Density::gaussian2d(double mx, double my, double vx, double vy, double cov) {
  Density d;
  d.kind_ = Kind::gaussian;
  d.dim_ = 2;
  GaussComponent c;
  c.mean[0] = mx;
  c.mean[1] = my;
  c.var[0] = vx;
  c.var[1] = vy;
  c.cov = cov;
  if (vx * vy - cov * cov <= 0.0) throw InvalidSpec("covariance matrix not positive definite");
  d.components_.push_back(c);
  return d;
}

Density Density::mixture(std::vector<GaussComponent> components, int dim) {
  if (components.empty() || (dim != 1 && dim != 2)) {
    throw InvalidSpec("mixture needs components and dimension 1 or 2");
  }
  double total = 0.0;
  for (const auto& c : components) {
    if (c.weight <= 0.0) throw InvalidSpec("mixture weights must be positive");
    total += c.weight;
  }
  for (auto& c : components) c.weight /= total;
  Density d;
  d.kind_ = Kind::gaussian_mixture;
  d.dim_ = dim;
  d.components_ = std::move(components);
  return d;
}

Density Density::histogram(Grid bins, std::vector<double> masses) {
  if (masses.size() != bins.cells()) throw InvalidSpec("histogram mass count != bin count");
  double total = 0.0;
  for (double m : masses) {
    if (m < 0.0) throw InvalidSpec("negative histogram mass");
    total += m;
  }
  if (total <= 0.0) throw EmptyBinRange("histogram carries no mass");
  for (auto& m : masses) m /= total;
  Density d;
  d.kind_ = Kind::histogram;
  d.dim_ = static_cast<int>(bins.dim());
  d.bins_ = std::move(bins);
  d.masses_ = std::move(masses);
  return d;
}

Density Density::from_samples(const Tensor& samples, const Grid& bins) {
  const std::size_t dim = bins.dim();
  std::size_t n = 0;
  if (samples.rank() == 1 && dim == 1) {
    n = samples.shape()[0];
  } else if (samples.rank() == 2 && samples.shape()[1] == dim) {
    n = samples.shape()[0];
  } else {
    throw ShapeMismatch("samples " + shape_str(samples.shape()) + " vs grid dim " +
                        std::to_string(dim));
  }
  std::vector<double> masses(bins.cells(), 0.0);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long cell = bins.cell_of(samples.data() + i * dim);
    if (cell < 0) continue;
    masses[static_cast<std::size_t>(cell)] += 1.0;
    ++inside;
  }
  if (inside == 0) throw EmptyBinRange("all samples fall outside the grid");
  return histogram(bins, std::move(masses));
}

namespace {

double eval_component(const GaussComponent& c, const double* x, int dim) {
  if (dim == 1) {
    const double z = x[0] - c.mean[0];
    return std::exp(-0.5 * z * z / c.var[0]) / std::sqrt(2.0 * M_PI * c.var[0]);
  }
  const double det = c.var[0] * c.var[1] - c.cov * c.cov;
  const double dx = x[0] - c.mean[0];
  const double dy = x[1] - c.mean[1];
  const double quad = (c.var[1] * dx * dx - 2.0 * c.cov * dx * dy + c.var[0] * dy * dy) / det;
  return std::exp(-0.5 * quad) / (2.0 * M_PI * std::sqrt(det));
}

}  // namespace

double Density::operator()(const double* x) const {
  if (kind_ == Kind::histogram) {
    const long cell = bins_.cell_of(x);
    if (cell < 0) return 0.0;
    return masses_[static_cast<std::size_t>(cell)] / bins_.cell_measure();
  }
  double acc = 0.0;
  for (const auto& c : components_) acc += c.weight * eval_component(c, x, dim_);
  return acc;
}

Grid Density::default_grid(std::size_t points_per_axis) const {
  Grid g;
  if (kind_ == Kind::histogram) {
    g = bins_;
    for (auto& axis : g.axes) axis.n = points_per_axis;
    return g;
  }
  for (int d = 0; d < dim_; ++d) {
    Grid::Axis axis;
    axis.lo = std::numeric_limits<double>::infinity();
    axis.hi = -axis.lo;
    for (const auto& c : components_) {
      const double s = std::sqrt(c.var[d]);
      axis.lo = std::min(axis.lo, c.mean[d] - 9.0 * s);
      axis.hi = std::max(axis.hi, c.mean[d] + 9.0 * s);
    }
    axis.n = points_per_axis;
    g.axes.push_back(axis);
  }
  return g;
}

Grid grid_for(const Density& p, const Density& q, std::size_t points_per_axis) {
  if (p.dim() != q.dim()) throw ShapeMismatch("densities have different dimensions");
  Grid a = p.default_grid(points_per_axis);
  Grid b = q.default_grid(points_per_axis);
  Grid g;
  for (std::size_t d = 0; d < a.axes.size(); ++d) {
    Grid::Axis axis;
    axis.lo = std::min(a.axes[d].lo, b.axes[d].lo);
    axis.hi = std::max(a.axes[d].hi, b.axes[d].hi);
    axis.n = points_per_axis;
    g.axes.push_back(axis);
  }
  return g;
}

double optimal_classifier(const Density& p1, const Density& p2, const double* x) {
  const double a = p1(x);
  const double b = p2(x);
  if (a + b <= 0.0) throw ZeroDensity("both densities vanish at the query point");
  return a / (a + b);
}

double kl(const Density& p, const Density& q, const Grid& grid) {
  const double dm = grid.cell_measure();
  double acc = 0.0;
  double x[2];
  for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
    grid.midpoint(cell, x);
    const double pv = p(x);
    if (pv <= 0.0) continue;  // 0*log(0) -> 0
    const double qv = q(x);
    if (qv <= 0.0) {
      if (pv * dm > 1e-12) {
        throw InfiniteDivergence("p has mass where q vanishes");
      }
      continue;
    }
    acc += pv * std::log(pv / qv) * dm;
  }
  return acc;
}

namespace {

// Shared kernel: quadrature of per-point contributions of (p1, p2).
template <typename F>
double integrate_pair(const Density& p1, const Density& p2, const Grid& grid, F f) {
  const double dm = grid.cell_measure();
  double acc = 0.0;
  double x[2];
  for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
    grid.midpoint(cell, x);
    acc += f(p1(x), p2(x)) * dm;
  }
  return acc;
}

}  // namespace

double jsd(const Density& p1, const Density& p2, const Grid& grid) {
  return integrate_pair(p1, p2, grid, [](double a, double b) {
    const double m = 0.5 * (a + b);
    if (m <= 0.0) return 0.0;  // both masses at most denormal
    double acc = 0.0;
    if (a > 0.0) acc += 0.5 * a * std::log(a / m);
    if (b > 0.0) acc += 0.5 * b * std::log(b / m);
    return acc;
  });
}

double ce_of_optimal_classifier(const Density& p1, const Density& p2, const Grid& grid) {
  return integrate_pair(p1, p2, grid, [](double a, double b) {
    const double s = a + b;
    double acc = 0.0;
    if (a > 0.0) acc -= a * std::log(a / s);
    if (b > 0.0) acc -= b * std::log(b / s);
    return acc;
  });
}

double empirical_jsd(const Tensor& samples1, const Tensor& samples2, const Grid& bins) {
  if (samples1.shape()[0] < 100 || samples2.shape()[0] < 100) {
    throw InvalidSpec("empirical_jsd needs at least 100 samples per side");
  }
  const Density h1 = Density::from_samples(samples1, bins);
  const Density h2 = Density::from_samples(samples2, bins);
  return jsd(h1, h2, bins);
}

Grid rice_grid(const Tensor& samples1, const Tensor& samples2) {
  const std::size_t dim = samples1.rank() == 1 ? 1 : samples1.shape()[1];
  const std::size_t n1 = samples1.shape()[0];
  const std::size_t n2 = samples2.shape()[0];
  const auto bins_for = [](std::size_t n) {
    return static_cast<std::size_t>(std::ceil(2.0 * std::cbrt(static_cast<double>(n))));
  };
  const std::size_t nbins = std::max<std::size_t>(2, bins_for(std::min(n1, n2)));
  Grid g;
  for (std::size_t d = 0; d < dim; ++d) {
    Grid::Axis axis;
    axis.lo = std::numeric_limits<double>::infinity();
    axis.hi = -axis.lo;
    for (std::size_t i = 0; i < n1; ++i) {
      axis.lo = std::min(axis.lo, samples1[i * dim + d]);
      axis.hi = std::max(axis.hi, samples1[i * dim + d]);
    }
    for (std::size_t i = 0; i < n2; ++i) {
      axis.lo = std::min(axis.lo, samples2[i * dim + d]);
      axis.hi = std::max(axis.hi, samples2[i * dim + d]);
    }
    // Nudge the upper edge so max-valued samples land in the last bin.
    const double pad = 1e-9 * std::max(1.0, std::fabs(axis.hi) + std::fabs(axis.lo));
    axis.hi += pad;
    axis.n = nbins;
    g.axes.push_back(axis);
  }
  return g;
}

double verify_proposition1(const Density& p1, const Density& p2, const Model& classifier,
                           const Grid& grid) {
  const std::size_t dim = grid.dim();
  Tensor points({grid.cells(), dim});
  double x[2];
  for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
    grid.midpoint(cell, x);
    for (std::size_t d = 0; d < dim; ++d) points.at2(cell, d) = x[d];
  }
  const Tensor pred = classifier.forward_value(points);
  double worst = 0.0;
  for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
    grid.midpoint(cell, x);
    const double a = p1(x);
    const double b = p2(x);
    if (a + b <= 0.0) continue;
    worst = std::max(worst, std::fabs(pred[cell] - a / (a + b)));
  }
  return worst;
}

double bce_kernel_argmax_scan(double m, double n, std::size_t resolution) {
  double best_f = 0.5;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < resolution; ++i) {
    const double f = (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
    const double v = m * std::log(f) + n * std::log(1.0 - f);
    if (v > best) {
      best = v;
      best_f = f;
    }
  }
  return best_f;
}

}  // namespace vacgan
