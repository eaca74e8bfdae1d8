#include "cournot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

constexpr double kMassTolerance = 1e-10;

Vector cell_edges_cdf(const Vector& density, double dy) {
  Vector edges(density.size() + 1);
  edges(0) = 0.0;
  for (Index j = 0; j < density.size(); ++j) edges(j + 1) = edges(j) + density(j) * dy;
  return edges;
}

// Integral over [0, h] of |a + (b - a) t / h| dt.
double abs_linear_integral(double a, double b, double h) {
  if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return 0.5 * h * std::abs(a + b);
  const double root = h * a / (a - b);
  return 0.5 * (std::abs(a) * root + std::abs(b) * (h - root));
}

}  // namespace

Grid1D::Grid1D(double lo, double hi, Index n) : y_min(lo), y_max(hi), n_cells(n) {
  if (!(lo < hi)) throw DomainError("Grid1D: y_min must be < y_max");
  if (n < 1) throw DomainError("Grid1D: n_cells must be >= 1");
}

Vector Grid1D::midpoints() const {
  Vector y(n_cells);
  for (Index j = 0; j < n_cells; ++j) y(j) = midpoint(j);
  return y;
}

Index Grid1D::cell_of(double y) const {
  const auto j = static_cast<Index>(std::floor((y - y_min) / dy()));
  return std::clamp<Index>(j, 0, n_cells - 1);
}

GridMeasure1D::GridMeasure1D(Grid1D grid, Vector density)
    : grid_(grid), density_(std::move(density)) {
  if (density_.size() != grid_.n_cells)
    throw ShapeError("GridMeasure1D: density length " + std::to_string(density_.size()) +
                     " != n_cells " + std::to_string(grid_.n_cells));
  double mass = 0.0;
  for (Index j = 0; j < density_.size(); ++j) {
    const double d = density_(j);
    if (!std::isfinite(d) || d < 0.0) throw DomainError("GridMeasure1D: density must be finite and >= 0");
    mass += d;
  }
  mass *= grid_.dy();
  if (std::abs(mass - 1.0) > kMassTolerance)
    throw DegenerateMeasureError("GridMeasure1D: total mass " + std::to_string(mass) + " != 1");
}

GridMeasure1D GridMeasure1D::uniform(const Grid1D& grid) {
  return GridMeasure1D(grid, Vector::Constant(grid.n_cells, 1.0 / (grid.y_max - grid.y_min)));
}

GridMeasure1D GridMeasure1D::uniform_on(const Grid1D& grid, double a, double b) {
  Vector indicator(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) {
    const double y = grid.midpoint(j);
    indicator(j) = (y >= a && y <= b) ? 1.0 : 0.0;
  }
  return normalize(indicator, grid);
}

double GridMeasure1D::mean() const {
  double m = 0.0;
  for (Index j = 0; j < size(); ++j) m += grid_.midpoint(j) * density_(j);
  return m * grid_.dy();
}

PointCloudMeasure::PointCloudMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.cols() == 0 || points_.rows() == 0) throw DomainError("PointCloudMeasure: empty point set");
  if (weights_.size() != points_.cols()) throw ShapeError("PointCloudMeasure: one weight per point required");
  double total = 0.0;
  for (Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_(i)) || weights_(i) < 0.0)
      throw DomainError("PointCloudMeasure: weights must be finite and >= 0");
    total += weights_(i);
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DegenerateMeasureError("PointCloudMeasure: weights sum to " + std::to_string(total));
}

QuadratureRule gauss_legendre(Index n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  Matrix jacobi = Matrix::Zero(n, n);
  for (Index k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double beta = kk / std::sqrt(4.0 * kk * kk - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  const double half = 0.5 * (b - a);
  QuadratureRule rule{Vector(n), Vector(n)};
  for (Index i = 0; i < n; ++i) {
    const double v0 = solver.eigenvectors()(0, i);
    rule.nodes(i) = a + half * (solver.eigenvalues()(i) + 1.0);
    rule.weights(i) = 2.0 * v0 * v0 * half;
  }
  return rule;
}

PointCloudMeasure QuarterDiskSampler::sample() const {
  if (n_points < 1) throw DomainError("QuarterDiskSampler: n_points must be >= 1");
  const auto n_r = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(n_points))));
  const Index n_theta = (n_points + n_r - 1) / n_r;
  const double dtheta = 0.5 * std::numbers::pi / static_cast<double>(n_theta);
  Matrix points(2, n_r * n_theta);
  Vector weights(n_r * n_theta);

  if (scheme == SamplingScheme::TensorPolarQuadrature) {
    const QuadratureRule radial = gauss_legendre(n_r, 0.0, 1.0);
    Index i = 0;
    for (Index a = 0; a < n_r; ++a) {
      const double r = radial.nodes(a);
      for (Index b = 0; b < n_theta; ++b, ++i) {
        const double theta = (static_cast<double>(b) + 0.5) * dtheta;
        points(0, i) = r * std::cos(theta);
        points(1, i) = r * std::sin(theta);
        weights(i) = radial.weights(a) * r * dtheta;
      }
    }
    weights /= weights.sum();
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto open_unit = [&] {
      double u = 0.0;
      while (u == 0.0) u = unit(rng);
      return u;
    };
    Index i = 0;
    for (Index a = 0; a < n_r; ++a) {
      for (Index b = 0; b < n_theta; ++b, ++i) {
        const double s = (static_cast<double>(a) + open_unit()) / static_cast<double>(n_r);
        const double theta = (static_cast<double>(b) + open_unit()) * dtheta;
        const double r = std::sqrt(s);
        points(0, i) = r * std::cos(theta);
        points(1, i) = r * std::sin(theta);
      }
    }
    weights.setConstant(1.0 / static_cast<double>(weights.size()));
  }
  return PointCloudMeasure(std::move(points), std::move(weights));
}

double quarter_disk_density(const Eigen::Vector2d& x) {
  return (x.x() >= 0.0 && x.y() >= 0.0 && x.squaredNorm() <= 1.0) ? 4.0 / std::numbers::pi : 0.0;
}

double cdf(const GridMeasure1D& nu, double y) {
  const Grid1D& g = nu.grid();
  const double slack = 1e-12 * (std::abs(g.y_min) + std::abs(g.y_max) + 1.0);
  if (!(y >= g.y_min - slack && y <= g.y_max + slack))
    throw DomainError("cdf: y=" + std::to_string(y) + " outside [y_min, y_max]");
  y = std::clamp(y, g.y_min, g.y_max);
  const double dy = g.dy();
  const Index j = g.cell_of(y);
  double below = 0.0;
  for (Index i = 0; i < j; ++i) below += nu.density(i);
  below *= dy;
  const double edge = g.y_min + static_cast<double>(j) * dy;
  return below + nu.density(j) * (y - edge);
}

Vector cdf_at_edges(const GridMeasure1D& nu) { return cell_edges_cdf(nu.density(), nu.grid().dy()); }

Vector cdf_at_midpoints(const GridMeasure1D& nu) {
  const double dy = nu.grid().dy();
  const Vector edges = cdf_at_edges(nu);
  Vector out(nu.size());
  for (Index j = 0; j < nu.size(); ++j) out(j) = edges(j) + 0.5 * nu.density(j) * dy;
  return out;
}

GridMeasure1D normalize(const Eigen::Ref<const Vector>& unnormalized, const Grid1D& grid) {
  if (unnormalized.size() != grid.n_cells) throw ShapeError("normalize: length does not match grid");
  double total = 0.0;
  bool positive = false;
  for (Index j = 0; j < unnormalized.size(); ++j) {
    const double d = unnormalized(j);
    if (!std::isfinite(d) || d < 0.0) throw DomainError("normalize: entries must be finite and >= 0");
    positive = positive || d > 0.0;
    total += d;
  }
  if (!positive) throw DegenerateMeasureError("normalize: all entries are zero");
  return GridMeasure1D(grid, unnormalized / (total * grid.dy()));
}

double wasserstein1_1d(const GridMeasure1D& a, const GridMeasure1D& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("wasserstein1_1d: grids differ");
  const double dy = a.grid().dy();
  const Vector fa = cdf_at_edges(a);
  const Vector fb = cdf_at_edges(b);
  double w = 0.0;
  for (Index j = 0; j < a.size(); ++j) w += abs_linear_integral(fa(j) - fb(j), fa(j + 1) - fb(j + 1), dy);
  return w;
}

Index support_size(const GridMeasure1D& nu, double threshold) {
  return (nu.density().array() > threshold).count();
}

}  // namespace cournot
