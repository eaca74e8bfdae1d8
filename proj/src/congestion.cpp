#include "cournot/congestion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cournot/errors.hpp"

namespace cournot {

Potential Potential::zero() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

Potential Potential::quadratic(double strength, double center) {
  return {[=](double y) { return strength * (y - center) * (y - center); },
          [=](double y) { return 2.0 * strength * (y - center); }, [=](double) { return 2.0 * strength; }};
}

Potential Potential::shifted(double constant) const {
  auto base = value;
  return {[base, constant](double y) { return base(y) + constant; }, derivative, second};
}

Vector Potential::on_grid(const Grid1D& grid) const {
  Vector out(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) out(j) = value(grid.midpoint(j));
  return out;
}

double CongestionSpec::f(double t) const { return (t > 0.0 ? t * std::log(t) : 0.0) + fprime_shift * t; }

double CongestionSpec::fprime(double t) const { return 1.0 + std::log(t) + fprime_shift; }

double CongestionSpec::fprime_of_log(double log_t) const { return 1.0 + log_t + fprime_shift; }

double CongestionSpec::fsecond(double t) const { return 1.0 / t; }

double CongestionSpec::fprime_inverse(double s) const { return std::exp(s - 1.0 - fprime_shift); }

double CongestionSpec::conjugate(double q) const { return std::exp(q - 1.0 - fprime_shift); }

void SolverConfig::validate() const {
  if (max_iters < 1) throw DomainError("SolverConfig: max_iters must be >= 1");
  if (!(tol_l1 > 0.0)) throw DomainError("SolverConfig: tol_l1 must be > 0");
  if (!(k_tol > 0.0)) throw DomainError("SolverConfig: k_tol must be > 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("SolverConfig: damping must lie in (0, 1]");
}

double l1_distance(const GridMeasure1D& a, const GridMeasure1D& b) {
  if (!(a.grid() == b.grid())) throw ShapeError("l1_distance: grids differ");
  return (a.density() - b.density()).cwiseAbs().sum() * a.grid().dy();
}

GridMeasure1D congestion_update(const LevelProfile& profile, const CongestionSpec& spec) {
  const Grid1D& grid = profile.grid;
  Vector s(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) {
    s(j) = -spec.potential.value(grid.midpoint(j)) - profile.v(j);
    if (!std::isfinite(s(j))) throw DomainError("congestion_update: non-finite potential or profile");
  }
  // Fixing C so that the largest entry is (f')^{-1}(f'(1)) = 1 keeps exp in range.
  const double c = spec.fprime(1.0) - s.maxCoeff();
  Vector unnormalized(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) unnormalized(j) = spec.fprime_inverse(c + s(j));
  return normalize(unnormalized, grid);
}

double optimality_residual(const LevelProfile& profile, const GridMeasure1D& nu, const CongestionSpec& spec) {
  if (!(profile.grid == nu.grid())) throw ShapeError("optimality_residual: grids differ");
  const Index n = nu.size();
  std::vector<double> r(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j)
    r[static_cast<std::size_t>(j)] =
        profile.v(j) + spec.fprime(nu.density(j)) + spec.potential.value(nu.grid().midpoint(j));
  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  double worst = 0.0;
  for (const double value : r) worst = std::max(worst, std::abs(value - median));
  return worst;
}

double optimality_residual(const EquilibriumResult& result, const CongestionSpec& spec) {
  return optimality_residual(result.profile, result.nu, spec);
}

double congestion_energy(const CostModel& cost, const PointCloudMeasure& mu, const GridMeasure1D& nu,
                         const AssignmentMap& map, const CongestionSpec& spec) {
  double interaction = 0.0;
  for (Index j = 0; j < nu.size(); ++j) {
    const double rho = nu.density(j);
    interaction += spec.f(rho) + spec.potential.value(nu.grid().midpoint(j)) * rho;
  }
  return map_coupling_cost(cost, map, mu, nu) + interaction * nu.grid().dy();
}

EquilibriumResult solve_congestion(const CostModel& cost, const PointCloudMeasure& mu, const CongestionSpec& spec,
                                   const GridMeasure1D& nu0, const SolverConfig& config) {
  config.validate();
  if ((nu0.density().array() <= 0.0).any())
    throw DomainError("solve_congestion: entropy congestion needs a strictly positive initial density");
  const Grid1D& grid = nu0.grid();
  const Matrix slopes = dy_c_matrix(cost, mu, grid);

  EquilibriumResult result{.nu = nu0, .profile = make_profile(grid, Vector::Zero(grid.n_cells))};
  GridMeasure1D nu = nu0;
  for (int it = 1; it <= config.max_iters; ++it) {
    const LevelProfile profile = level_profile(slopes, mu.weights(), nu, config.k_tol);
    const AssignmentMap map = assign_map(slopes, profile);
    result.energy_history.push_back(congestion_energy(cost, mu, nu, map, spec));

    GridMeasure1D next = congestion_update(profile, spec);
    if (config.damping < 1.0)
      next = normalize(config.damping * next.density() + (1.0 - config.damping) * nu.density(), grid);
    const double delta = l1_distance(next, nu);
    result.history.push_back(delta);
    result.residual_history.push_back(optimality_residual(profile, nu, spec));
    nu = std::move(next);
    result.iterations = it;
    if (delta <= config.tol_l1) {
      result.converged = true;
      break;
    }
  }

  result.profile = level_profile(slopes, mu.weights(), nu, config.k_tol);
  result.map = assign_map(slopes, result.profile);
  result.nu = std::move(nu);
  result.residual = optimality_residual(result.profile, result.nu, spec);
  return result;
}

}  // namespace cournot
