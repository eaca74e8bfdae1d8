#pragma once

#include <vector>

#include "cournot/cost_model.hpp"
#include "cournot/measures.hpp"

namespace cournot {

/// k(y) at the grid midpoints and its running trapezoid integral v(y) from
/// y_min (the Kantorovich potential on Y, up to the gauge (u, v) -> (u + C, v - C)).
struct LevelProfile {
  Grid1D grid;
  Vector k;
  Vector v;
};

/// Builds a profile from midpoint values of k; v(y_0) = k_0 dy / 2 and v is
/// the trapezoid integral of k thereafter.
LevelProfile make_profile(const Grid1D& grid, Vector k);

/// Super-level mass k -> mu({x : dy_c(x, y) >= k}) for one fixed y.
///
/// The exact mass is a step function of k. smoothed() is the continuous,
/// strictly decreasing interpolant through (kappa_g, mass strictly above
/// kappa_g + half the mass at kappa_g) over the distinct slope values
/// kappa_g, padded by one mean gap on each side. solve() inverts smoothed();
/// the exact mass at the returned k differs from the target by at most one
/// point weight.
class SuperlevelMass {
 public:
  SuperlevelMass(const Eigen::Ref<const Vector>& slopes, const Vector& weights);

  double exact(double k) const;
  double smoothed(double k) const;
  /// Bisection on smoothed() until |smoothed(k) - target| <= tol.
  double solve(double target, double tol) const;

  double k_lo() const { return knots_k_.front(); }
  double k_hi() const { return knots_k_.back(); }

 private:
  std::vector<double> sorted_k_;     // ascending, positive-weight points
  std::vector<double> mass_at_or_above_;  // mass of {slope >= sorted_k_[i]}
  std::vector<double> knots_k_;      // ascending, includes the two pads
  std::vector<double> knots_mass_;   // descending
};

/// mu(X_>=(y, k)) = sum of weights with dy_c(x_i, y) >= k.
double superlevel_mass(const CostModel& cost, const PointCloudMeasure& mu, double y, double k);

/// k solving mu(X_>=(y, k)) = target_mass on the smoothed mass function.
double solve_k(const CostModel& cost, const PointCloudMeasure& mu, double y, double target_mass, double tol);

/// k_j = solve_k(y_j, cdf(nu, y_j)) at every midpoint.
LevelProfile level_profile(const CostModel& cost, const PointCloudMeasure& mu, const GridMeasure1D& nu,
                           double tol);
/// Same, reusing a precomputed dy_c_matrix(cost, mu, nu.grid()).
LevelProfile level_profile(const Matrix& slopes, const Vector& weights, const GridMeasure1D& nu, double tol);

struct AssignmentMap {
  Vector assigned_y;
  Eigen::VectorXi assigned_cell;
  /// Points whose g(y) = dy_c(x, y) - k(y) changes sign more than once.
  std::vector<Index> multiple_crossing_points;
  /// Points whose crossing had to be clamped to y_min or y_max.
  Index boundary_assignments = 0;
};

/// T(x_i): where g_i(y) = dy_c(x_i, y) - k(y) turns from negative to
/// nonnegative, located by scanning the midpoints and linear interpolation
/// (linear extrapolation into the two boundary half cells).
AssignmentMap assign_map(const CostModel& cost, const PointCloudMeasure& mu, const LevelProfile& profile);
AssignmentMap assign_map(const Matrix& slopes, const LevelProfile& profile);

/// sum_i w_i c(x_i, T(x_i)).
double transport_cost(const CostModel& cost, const PointCloudMeasure& mu, const AssignmentMap& map);

/// Histogram of T_# mu on the cells of grid.
GridMeasure1D pushforward_histogram(const AssignmentMap& map, const PointCloudMeasure& mu, const Grid1D& grid);

/// The coupling in Pi(mu, nu) that fills the cells of nu in increasing order
/// of T(x_i) (a point may be split over consecutive cells). M x N, entries
/// are masses.
Matrix map_coupling(const AssignmentMap& map, const PointCloudMeasure& mu, const GridMeasure1D& nu);
/// sum_ij gamma_ij c(x_i, y_j) for gamma = map_coupling(map, mu, nu).
double map_coupling_cost(const CostModel& cost, const AssignmentMap& map, const PointCloudMeasure& mu,
                         const GridMeasure1D& nu);

struct KantorovichPair {
  Vector u;  // over mu points
  Vector v;  // over grid midpoints
};

/// v from the profile, u_i = min_j c(x_i, y_j) - v_j.
KantorovichPair kantorovich_potential_pair(const CostModel& cost, const PointCloudMeasure& mu,
                                           const LevelProfile& profile);

/// sum_i u_i w_i + sum_j v_j nu_j dy.
double dual_objective(const KantorovichPair& pair, const PointCloudMeasure& mu, const GridMeasure1D& nu);

}  // namespace cournot
