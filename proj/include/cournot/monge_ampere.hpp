#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cournot/cost_model.hpp"
#include "cournot/measures.hpp"
#include "cournot/transport.hpp"

namespace cournot {

using Polyline = std::vector<Eigen::Vector2d>;

/// {x in closed quarter disk : dy_c(x, y) = k}, possibly in several pieces.
struct LevelCurve {
  std::vector<Polyline> pieces;

  bool empty() const { return pieces.empty(); }
  double length() const;
};

/// Level curve of dy_c(., y) at level k inside the closed unit quarter disk.
/// Costs with a linear level set get the exact chord sampled at `resolution`
/// points; other costs go through marching squares on a resolution x
/// resolution grid over [0, 1]^2 followed by clipping to the disk.
LevelCurve level_curve(const CostModel& cost, double y, double k, int resolution);

/// The marching-squares path of level_curve, available for any cost.
LevelCurve marching_squares_level_curve(const CostModel& cost, double y, double k, int resolution);

using DensityFn = std::function<double(const Eigen::Vector2d&)>;

struct MaDensity {
  double value = 0.0;
  /// Smallest |grad_x dy_c| met along the curve (+inf for an empty curve).
  double min_grad_norm = 0.0;
};

/// Line integral over the level curve of
///   (dyy_c(x, y) - kprime) / |grad_x dy_c(x, y)| * density(x)
/// by the composite trapezoid rule in arclength.
MaDensity ma_density(const CostModel& cost, const DensityFn& density, double y, double k, double kprime,
                     int resolution);
MaDensity ma_density(const CostModel& cost, const DensityFn& density, const LevelCurve& curve, double y,
                     double kprime);

struct MaResidual {
  double relative_l1 = 0.0;
  /// Fewer than three cells: k' used one-sided differences only.
  bool low_resolution = false;
  double min_grad_norm = 0.0;
};

/// ||G(y, k, k') - nu||_1 / ||nu||_1 over the grid, k' by centered
/// differences (one-sided at the ends).
MaResidual ma_residual(const CostModel& cost, const DensityFn& density, const GridMeasure1D& nu,
                       const LevelProfile& profile, int resolution);

/// Largest distance from a polyline vertex to the chord joining its ends.
double max_chord_deviation(const Polyline& line);

}  // namespace cournot
