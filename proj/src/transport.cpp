#include "cournot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cournot/errors.hpp"

namespace cournot {

LevelProfile make_profile(const Grid1D& grid, Vector k) {
  if (k.size() != grid.n_cells) throw ShapeError("make_profile: k length does not match grid");
  const double dy = grid.dy();
  Vector v(k.size());
  v(0) = 0.5 * k(0) * dy;
  for (Index j = 1; j < k.size(); ++j) v(j) = v(j - 1) + 0.5 * (k(j - 1) + k(j)) * dy;
  return LevelProfile{grid, std::move(k), std::move(v)};
}

SuperlevelMass::SuperlevelMass(const Eigen::Ref<const Vector>& slopes, const Vector& weights) {
  if (slopes.size() != weights.size()) throw ShapeError("SuperlevelMass: slopes and weights differ in length");
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(slopes.size()));
  for (Index i = 0; i < slopes.size(); ++i)
    if (weights(i) > 0.0) order.push_back(i);
  if (order.empty()) throw DomainError("SuperlevelMass: measure has no support");
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return slopes(a) < slopes(b); });

  const std::size_t n = order.size();
  sorted_k_.resize(n);
  mass_at_or_above_.resize(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    sorted_k_[i] = slopes(order[i]);
    w[i] = weights(order[i]);
  }
  double suffix = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    suffix += w[i];
    mass_at_or_above_[i] = suffix;
  }
  // Ties: every member of a group sees the mass of the whole group.
  for (std::size_t i = 1; i < n; ++i)
    if (sorted_k_[i] == sorted_k_[i - 1]) mass_at_or_above_[i] = mass_at_or_above_[i - 1];

  std::vector<double> group_k;
  std::vector<double> group_mid_mass;
  for (std::size_t i = 0; i < n;) {
    std::size_t end = i;
    double group_w = 0.0;
    while (end < n && sorted_k_[end] == sorted_k_[i]) group_w += w[end++];
    const double above = end < n ? mass_at_or_above_[end] : 0.0;
    group_k.push_back(sorted_k_[i]);
    group_mid_mass.push_back(above + 0.5 * group_w);
    i = end;
  }
  const double spread = group_k.back() - group_k.front();
  const double pad = spread > 0.0 ? spread / static_cast<double>(group_k.size())
                                  : 1e-9 * std::max(1.0, std::abs(group_k.front()));
  knots_k_.reserve(group_k.size() + 2);
  knots_mass_.reserve(group_k.size() + 2);
  knots_k_.push_back(group_k.front() - pad);
  knots_mass_.push_back(mass_at_or_above_.front());
  knots_k_.insert(knots_k_.end(), group_k.begin(), group_k.end());
  knots_mass_.insert(knots_mass_.end(), group_mid_mass.begin(), group_mid_mass.end());
  knots_k_.push_back(group_k.back() + pad);
  knots_mass_.push_back(0.0);
}

double SuperlevelMass::exact(double k) const {
  const auto it = std::lower_bound(sorted_k_.begin(), sorted_k_.end(), k);
  if (it == sorted_k_.end()) return 0.0;
  return mass_at_or_above_[static_cast<std::size_t>(it - sorted_k_.begin())];
}

double SuperlevelMass::smoothed(double k) const {
  if (k <= knots_k_.front()) return knots_mass_.front();
  if (k >= knots_k_.back()) return 0.0;
  const auto it = std::upper_bound(knots_k_.begin(), knots_k_.end(), k);
  const auto hi = static_cast<std::size_t>(it - knots_k_.begin());
  const std::size_t lo = hi - 1;
  const double t = (k - knots_k_[lo]) / (knots_k_[hi] - knots_k_[lo]);
  return knots_mass_[lo] + t * (knots_mass_[hi] - knots_mass_[lo]);
}

double SuperlevelMass::solve(double target, double tol) const {
  if (!(target >= -1e-12 && target <= 1.0 + 1e-12))
    throw DomainError("solve_k: target mass " + std::to_string(target) + " outside [0, 1]");
  if (target >= knots_mass_.front()) return knots_k_.front();
  if (target <= 0.0) return knots_k_.back();
  double lo = knots_k_.front();
  double hi = knots_k_.back();
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double m = smoothed(mid);
    if (std::abs(m - target) <= tol) break;
    if (m > target) lo = mid;
    else hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) break;
  }
  return mid;
}

double superlevel_mass(const CostModel& cost, const PointCloudMeasure& mu, double y, double k) {
  double mass = 0.0;
  for (Index i = 0; i < mu.size(); ++i)
    if (cost.dy_c(mu.point(i), y) >= k) mass += mu.weight(i);
  return mass;
}

double solve_k(const CostModel& cost, const PointCloudMeasure& mu, double y, double target_mass, double tol) {
  Vector slopes(mu.size());
  for (Index i = 0; i < mu.size(); ++i) slopes(i) = cost.dy_c(mu.point(i), y);
  return SuperlevelMass(slopes, mu.weights()).solve(target_mass, tol);
}

LevelProfile level_profile(const Matrix& slopes, const Vector& weights, const GridMeasure1D& nu, double tol) {
  if (slopes.cols() != nu.size() || slopes.rows() != weights.size())
    throw ShapeError("level_profile: slope matrix shape does not match mu x grid");
  const Vector targets = cdf_at_midpoints(nu);
  Vector k(nu.size());
  for (Index j = 0; j < nu.size(); ++j) k(j) = SuperlevelMass(slopes.col(j), weights).solve(targets(j), tol);
  return make_profile(nu.grid(), std::move(k));
}

LevelProfile level_profile(const CostModel& cost, const PointCloudMeasure& mu, const GridMeasure1D& nu,
                           double tol) {
  return level_profile(dy_c_matrix(cost, mu, nu.grid()), mu.weights(), nu, tol);
}

AssignmentMap assign_map(const Matrix& slopes, const LevelProfile& profile) {
  const Grid1D& grid = profile.grid;
  const Index n = grid.n_cells;
  if (slopes.cols() != n) throw ShapeError("assign_map: slope matrix does not match profile grid");
  const double dy = grid.dy();
  AssignmentMap map;
  map.assigned_y.resize(slopes.rows());
  map.assigned_cell.resize(slopes.rows());

  for (Index i = 0; i < slopes.rows(); ++i) {
    auto g = [&](Index j) { return slopes(i, j) - profile.k(j); };
    double y = grid.midpoint(0);
    if (n > 1) {
      Index first = 0;
      while (first < n && g(first) < 0.0) ++first;
      if (first == n) {
        const double slope = (g(n - 1) - g(n - 2)) / dy;
        y = slope > 0.0 ? grid.midpoint(n - 1) - g(n - 1) / slope : grid.y_max;
        if (y >= grid.y_max) {
          y = grid.y_max;
          ++map.boundary_assignments;
        }
      } else if (first == 0) {
        const double slope = (g(1) - g(0)) / dy;
        y = slope > 0.0 ? grid.midpoint(0) - g(0) / slope : grid.y_min;
        if (y <= grid.y_min) {
          y = grid.y_min;
          ++map.boundary_assignments;
        }
      } else {
        const double g0 = g(first - 1);
        const double g1 = g(first);
        y = grid.midpoint(first - 1) + (-g0) / (g1 - g0) * dy;
      }
      for (Index j = std::max<Index>(first, 1); j < n; ++j) {
        if (g(j) < 0.0) {
          map.multiple_crossing_points.push_back(i);
          break;
        }
      }
    }
    map.assigned_y(i) = y;
    map.assigned_cell(i) = static_cast<int>(grid.cell_of(y));
  }
  return map;
}

AssignmentMap assign_map(const CostModel& cost, const PointCloudMeasure& mu, const LevelProfile& profile) {
  return assign_map(dy_c_matrix(cost, mu, profile.grid), profile);
}

double transport_cost(const CostModel& cost, const PointCloudMeasure& mu, const AssignmentMap& map) {
  if (map.assigned_y.size() != mu.size()) throw ShapeError("transport_cost: map does not cover mu");
  double total = 0.0;
  for (Index i = 0; i < mu.size(); ++i) total += mu.weight(i) * cost.c(mu.point(i), map.assigned_y(i));
  return total;
}

GridMeasure1D pushforward_histogram(const AssignmentMap& map, const PointCloudMeasure& mu, const Grid1D& grid) {
  Vector mass = Vector::Zero(grid.n_cells);
  for (Index i = 0; i < mu.size(); ++i) mass(grid.cell_of(map.assigned_y(i))) += mu.weight(i);
  return normalize(mass, grid);
}

namespace {

// Visits (i, j, mass) of the order-preserving coupling between T_# mu and nu.
template <typename Visit>
void fill_in_map_order(const AssignmentMap& map, const PointCloudMeasure& mu, const GridMeasure1D& nu,
                       Visit&& visit) {
  const Index n = nu.size();
  std::vector<Index> order(static_cast<std::size_t>(mu.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return map.assigned_y(a) < map.assigned_y(b); });
  Vector capacity = nu.masses();
  Index j = 0;
  for (const Index i : order) {
    double remaining = mu.weight(i);
    while (remaining > 0.0) {
      if (j == n - 1) {
        visit(i, j, remaining);
        break;
      }
      const double take = std::min(remaining, capacity(j));
      if (take > 0.0) visit(i, j, take);
      remaining -= take;
      capacity(j) -= take;
      if (capacity(j) <= 0.0) ++j;
    }
  }
}

}  // namespace

Matrix map_coupling(const AssignmentMap& map, const PointCloudMeasure& mu, const GridMeasure1D& nu) {
  if (map.assigned_y.size() != mu.size()) throw ShapeError("map_coupling: map does not cover mu");
  Matrix gamma = Matrix::Zero(mu.size(), nu.size());
  fill_in_map_order(map, mu, nu, [&](Index i, Index j, double mass) { gamma(i, j) += mass; });
  return gamma;
}

double map_coupling_cost(const CostModel& cost, const AssignmentMap& map, const PointCloudMeasure& mu,
                         const GridMeasure1D& nu) {
  if (map.assigned_y.size() != mu.size()) throw ShapeError("map_coupling_cost: map does not cover mu");
  double total = 0.0;
  fill_in_map_order(map, mu, nu, [&](Index i, Index j, double mass) {
    total += mass * cost.c(mu.point(i), nu.grid().midpoint(j));
  });
  return total;
}

KantorovichPair kantorovich_potential_pair(const CostModel& cost, const PointCloudMeasure& mu,
                                           const LevelProfile& profile) {
  const Grid1D& grid = profile.grid;
  KantorovichPair pair{Vector(mu.size()), profile.v};
  for (Index i = 0; i < mu.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < grid.n_cells; ++j)
      best = std::min(best, cost.c(mu.point(i), grid.midpoint(j)) - profile.v(j));
    pair.u(i) = best;
  }
  return pair;
}

double dual_objective(const KantorovichPair& pair, const PointCloudMeasure& mu, const GridMeasure1D& nu) {
  return pair.u.dot(mu.weights()) + pair.v.dot(nu.masses());
}

}  // namespace cournot
