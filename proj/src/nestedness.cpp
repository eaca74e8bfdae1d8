#include "cournot/nestedness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

std::vector<Index> superlevel_members(const Eigen::Ref<const Vector>& slopes, const Vector& weights, double k) {
  std::vector<Index> members;
  for (Index i = 0; i < slopes.size(); ++i)
    if (weights(i) > 0.0 && slopes(i) >= k) members.push_back(i);
  return members;
}

}  // namespace

NestednessReport check_nestedness(const Matrix& slopes, const Vector& weights, const LevelProfile& profile,
                                  Index pair_stride) {
  if (pair_stride < 1) throw DomainError("check_nestedness: stride must be >= 1");
  const Index n = profile.grid.n_cells;
  if (slopes.cols() != n || slopes.rows() != weights.size())
    throw ShapeError("check_nestedness: slope matrix does not match mu x grid");
  NestednessReport report;
  report.stride = pair_stride;
  report.n_cells = n;
  for (Index j0 = 0; j0 < n; j0 += pair_stride) {
    const std::vector<Index> inside = superlevel_members(slopes.col(j0), weights, profile.k(j0));
    for (Index j1 = j0 + pair_stride; j1 < n; j1 += pair_stride) {
      const double k1 = profile.k(j1);
      const double tangency_tol = 1e-12 * std::max(1.0, std::abs(k1));
      NestednessViolation v{profile.grid.midpoint(j0), profile.grid.midpoint(j1), 0, 0};
      for (const Index i : inside) {
        const double d = slopes(i, j1);
        if (d <= k1) {
          ++v.count;
          if (k1 - d <= tangency_tol) ++v.tangencies;
        }
      }
      if (v.count > 0) {
        report.total_violations += v.count;
        report.total_tangencies += v.tangencies;
        report.violations.push_back(v);
      }
    }
  }
  report.is_nested = report.total_violations == 0;
  return report;
}

NestednessReport check_nestedness(const CostModel& cost, const PointCloudMeasure& mu, const LevelProfile& profile,
                                  Index pair_stride) {
  return check_nestedness(dy_c_matrix(cost, mu, profile.grid), mu.weights(), profile, pair_stride);
}

double k_max(const CostModel& cost, const PointCloudMeasure& mu, double y0, double y1, double k0) {
  if (!(y0 < y1)) throw DomainError("k_max: requires y0 < y1");
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0.0 || cost.dy_c(mu.point(i), y0) < k0) continue;
    any = true;
    best = std::min(best, cost.dy_c(mu.point(i), y1));
  }
  if (!any) throw DomainError("k_max: X_>=(y0, k0) is empty");
  return best;
}

double minimal_mass_difference(const CostModel& cost, const PointCloudMeasure& mu, double y0, double y1, double k0) {
  const double kmax = k_max(cost, mu, y0, y1, k0);
  double mass = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    const auto x = mu.point(i);
    if (cost.dy_c(x, y1) >= kmax && cost.dy_c(x, y0) < k0) mass += mu.weight(i);
  }
  return mass;
}

SufficientNestednessReport sufficient_nestedness(const CostModel& cost, const PointCloudMeasure& mu,
                                                 const GridMeasure1D& nu, const LevelProfile& profile,
                                                 Index pair_stride) {
  if (pair_stride < 1) throw DomainError("sufficient_nestedness: stride must be >= 1");
  if (!(nu.grid() == profile.grid)) throw ShapeError("sufficient_nestedness: profile and nu grids differ");
  const Grid1D& grid = profile.grid;
  const Index n = grid.n_cells;
  const Matrix slopes = dy_c_matrix(cost, mu, grid);
  const Vector& w = mu.weights();

  SufficientNestednessReport report;
  report.stride = pair_stride;
  report.n_cells = n;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  bool any_pair = false;
  std::vector<char> in_set(static_cast<std::size_t>(mu.size()));
  for (Index j0 = 0; j0 < n; j0 += pair_stride) {
    const double k0 = profile.k(j0);
    bool nonempty = false;
    for (Index i = 0; i < mu.size(); ++i) {
      in_set[static_cast<std::size_t>(i)] = w(i) > 0.0 && slopes(i, j0) >= k0;
      nonempty = nonempty || in_set[static_cast<std::size_t>(i)];
    }
    if (!nonempty) continue;
    double nu_min = nu.density(j0);
    for (Index j1 = j0 + pair_stride; j1 < n; j1 += pair_stride) {
      for (Index j = j1 - pair_stride + 1; j <= j1; ++j) nu_min = std::min(nu_min, nu.density(j));
      double kmax = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < mu.size(); ++i)
        if (in_set[static_cast<std::size_t>(i)]) kmax = std::min(kmax, slopes(i, j1));
      double dmin = 0.0;
      for (Index i = 0; i < mu.size(); ++i)
        if (w(i) > 0.0 && !in_set[static_cast<std::size_t>(i)] && slopes(i, j1) >= kmax) dmin += w(i);
      const double margin = dmin / (grid.midpoint(j1) - grid.midpoint(j0)) - nu_min;
      report.worst_margin = std::max(report.worst_margin, margin);
      any_pair = true;
    }
  }
  report.no_pairs = !any_pair;
  report.holds = report.no_pairs || report.worst_margin < 0.0;
  return report;
}

}  // namespace cournot
