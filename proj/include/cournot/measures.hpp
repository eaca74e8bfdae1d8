#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace cournot {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform partition of Y = (y_min, y_max) into n_cells cells. Values live at
/// the cell midpoints.
struct Grid1D {
  double y_min = 0.0;
  double y_max = 1.0;
  Index n_cells = 1;

  Grid1D() = default;
  Grid1D(double y_min, double y_max, Index n_cells);

  double dy() const { return (y_max - y_min) / static_cast<double>(n_cells); }
  double midpoint(Index j) const { return y_min + (static_cast<double>(j) + 0.5) * dy(); }
  Vector midpoints() const;
  /// Index of the cell containing y, clamped to [0, n_cells).
  Index cell_of(double y) const;

  bool operator==(const Grid1D&) const = default;
};

/// Piecewise-constant probability density on a Grid1D. The CDF is the
/// piecewise-linear function through the cell edges.
class GridMeasure1D {
 public:
  GridMeasure1D(Grid1D grid, Vector density);

  static GridMeasure1D uniform(const Grid1D& grid);
  /// Uniform on the cells whose midpoint lies in [a, b], zero elsewhere.
  static GridMeasure1D uniform_on(const Grid1D& grid, double a, double b);

  const Grid1D& grid() const { return grid_; }
  const Vector& density() const { return density_; }
  double density(Index j) const { return density_(j); }
  Index size() const { return grid_.n_cells; }

  /// Cell masses density * dy.
  Vector masses() const { return density_ * grid_.dy(); }
  double mean() const;

 private:
  Grid1D grid_;
  Vector density_;
};

/// Weighted sample of the type distribution: column i of points() is x_i.
class PointCloudMeasure {
 public:
  PointCloudMeasure(Matrix points, Vector weights);

  Index size() const { return points_.cols(); }
  Index dim() const { return points_.rows(); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  auto point(Index i) const { return points_.col(i); }
  double weight(Index i) const { return weights_(i); }

 private:
  Matrix points_;
  Vector weights_;
};

enum class SamplingScheme { TensorPolarQuadrature, Stratified };

/// Discretizes the uniform measure on {x1, x2 > 0, x1^2 + x2^2 < 1}.
///
/// TensorPolarQuadrature uses Gauss-Legendre nodes in r (with the area
/// factor r folded into the weights) times the midpoint rule in theta; it is
/// deterministic and ignores the seed. Stratified draws one equal-weight point
/// per (r^2, theta) stratum from a seeded generator.
struct QuarterDiskSampler {
  Index n_points = 10000;
  SamplingScheme scheme = SamplingScheme::TensorPolarQuadrature;
  std::uint64_t seed = 0;

  PointCloudMeasure sample() const;
};

/// Density 4/pi of the uniform law on the open quarter disk, 0 outside.
double quarter_disk_density(const Eigen::Vector2d& x);

struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Golub-Welsch).
QuadratureRule gauss_legendre(Index n, double a, double b);

/// CDF of nu at y in [y_min, y_max].
double cdf(const GridMeasure1D& nu, double y);
/// CDF evaluated at every cell midpoint.
Vector cdf_at_midpoints(const GridMeasure1D& nu);
/// CDF at the n_cells + 1 cell edges.
Vector cdf_at_edges(const GridMeasure1D& nu);

/// Rescales a nonnegative vector into a probability density on grid.
GridMeasure1D normalize(const Eigen::Ref<const Vector>& unnormalized, const Grid1D& grid);

/// W1 = integral of |CDF_a - CDF_b|, exact for piecewise-linear CDFs.
double wasserstein1_1d(const GridMeasure1D& a, const GridMeasure1D& b);

/// Number of cells whose density exceeds threshold.
Index support_size(const GridMeasure1D& nu, double threshold = 1e-6);

}  // namespace cournot
