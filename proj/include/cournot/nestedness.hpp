#pragma once

#include <vector>

#include "cournot/cost_model.hpp"
#include "cournot/measures.hpp"
#include "cournot/transport.hpp"

namespace cournot {

struct NestednessViolation {
  double y0 = 0.0;
  double y1 = 0.0;
  Index count = 0;
  /// Of count, points with dy_c(x, y1) == k(y1) to within 1e-12 (boundary
  /// tangency rather than a strict crossing).
  Index tangencies = 0;
};

struct NestednessReport {
  bool is_nested = true;
  std::vector<NestednessViolation> violations;
  Index total_violations = 0;
  Index total_tangencies = 0;
  Index stride = 1;
  Index n_cells = 0;
};

/// For grid pairs y0 < y1 (every stride-th midpoint) counts mu points lying
/// in X_>=(y0, k(y0)) but not in X_>(y1, k(y1)).
NestednessReport check_nestedness(const CostModel& cost, const PointCloudMeasure& mu, const LevelProfile& profile,
                                  Index pair_stride = 1);
NestednessReport check_nestedness(const Matrix& slopes, const Vector& weights, const LevelProfile& profile,
                                  Index pair_stride = 1);

/// sup{k : X_>=(y0, k0) subset X_>=(y1, k)} over the point cloud, i.e. the
/// minimum of dy_c(x, y1) over the positive-weight points of X_>=(y0, k0).
double k_max(const CostModel& cost, const PointCloudMeasure& mu, double y0, double y1, double k0);

/// mu(X_>=(y1, k_max(y0, y1, k0)) \ X_>=(y0, k0)).
double minimal_mass_difference(const CostModel& cost, const PointCloudMeasure& mu, double y0, double y1, double k0);

struct SufficientNestednessReport {
  bool holds = true;
  /// sup over pairs of D_min / (y1 - y0) - min_{y0 <= y <= y1} nu(y).
  double worst_margin = 0.0;
  bool no_pairs = false;
  Index stride = 1;
  Index n_cells = 0;
};

/// Grid evaluation of the density criterion: holds iff, over all midpoint
/// pairs y0 < y1, D_min(y0, y1, k(y0)) / (y1 - y0) < min of nu on [y0, y1].
/// Being a discretized sufficient condition, the result is indicative.
SufficientNestednessReport sufficient_nestedness(const CostModel& cost, const PointCloudMeasure& mu,
                                                 const GridMeasure1D& nu, const LevelProfile& profile,
                                                 Index pair_stride = 1);

}  // namespace cournot
