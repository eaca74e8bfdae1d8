#include "cournot/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

// logsumexp over j of (shift_j + K_ij), one value per row i.
Vector row_logsumexp(const Matrix& log_kernel, const Vector& shift) {
  const Index m = log_kernel.rows();
  const Index n = log_kernel.cols();
  Vector peak = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) peak(i) = std::max(peak(i), shift(j) + log_kernel(i, j));
  Vector sum = Vector::Zero(m);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) sum(i) += std::exp(shift(j) + log_kernel(i, j) - peak(i));
  return peak.array() + sum.array().log();
}

// logsumexp over i of (shift_i + K_ij), one value per column j.
Vector column_logsumexp(const Matrix& log_kernel, const Vector& shift) {
  const Index m = log_kernel.rows();
  const Index n = log_kernel.cols();
  Vector out(n);
  for (Index j = 0; j < n; ++j) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < m; ++i) peak = std::max(peak, shift(i) + log_kernel(i, j));
    double sum = 0.0;
    for (Index i = 0; i < m; ++i) sum += std::exp(shift(i) + log_kernel(i, j) - peak);
    out(j) = peak + std::log(sum);
  }
  return out;
}

void check_shapes(const GibbsKernel& kernel, const DualPotentials& duals) {
  if (duals.u.size() != kernel.log_kernel.rows() || duals.v.size() != kernel.log_kernel.cols())
    throw ShapeError("sinkhorn: dual potentials do not match the kernel");
}

double total_mass(const GibbsKernel& kernel, const DualPotentials& duals) {
  const Vector log_mass = column_log_mass(kernel, duals.u);
  double total = 0.0;
  for (Index j = 0; j < log_mass.size(); ++j) total += std::exp(duals.v(j) / kernel.epsilon + log_mass(j));
  return total;
}

}  // namespace

GibbsKernel GibbsKernel::from_cost(const Matrix& cost, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("GibbsKernel: epsilon must be > 0");
  if (!cost.allFinite()) throw DomainError("GibbsKernel: cost matrix must be finite");
  return {-cost / epsilon, epsilon};
}

GibbsKernel GibbsKernel::from_cost(const CostModel& cost, const PointCloudMeasure& mu, const Grid1D& grid,
                                   double epsilon) {
  return from_cost(cost_matrix(cost, mu, grid), epsilon);
}

Matrix coupling(const GibbsKernel& kernel, const DualPotentials& duals) {
  check_shapes(kernel, duals);
  const double eps = kernel.epsilon;
  Matrix gamma(kernel.log_kernel.rows(), kernel.log_kernel.cols());
  for (Index j = 0; j < gamma.cols(); ++j)
    for (Index i = 0; i < gamma.rows(); ++i)
      gamma(i, j) = std::exp((duals.u(i) + duals.v(j)) / eps + kernel.log_kernel(i, j));
  return gamma;
}

Vector row_marginal(const GibbsKernel& kernel, const DualPotentials& duals) {
  check_shapes(kernel, duals);
  const Vector lse = row_logsumexp(kernel.log_kernel, duals.v / kernel.epsilon);
  return (duals.u.array() / kernel.epsilon + lse.array()).exp();
}

Vector column_marginal(const GibbsKernel& kernel, const DualPotentials& duals) {
  check_shapes(kernel, duals);
  const Vector lse = column_log_mass(kernel, duals.u);
  return (duals.v.array() / kernel.epsilon + lse.array()).exp();
}

Vector column_log_mass(const GibbsKernel& kernel, const Vector& u) {
  if (u.size() != kernel.log_kernel.rows()) throw ShapeError("column_log_mass: u does not match the kernel");
  return column_logsumexp(kernel.log_kernel, u / kernel.epsilon);
}

Vector u_update(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& mu_weights) {
  check_shapes(kernel, duals);
  if (mu_weights.size() != duals.u.size()) throw ShapeError("u_update: mu does not match the kernel");
  if ((mu_weights.array() <= 0.0).any()) throw DomainError("u_update: mu weights must be strictly positive");
  const double eps = kernel.epsilon;
  const Vector lse = row_logsumexp(kernel.log_kernel, duals.v / eps);
  return eps * (mu_weights.array().log() - lse.array());
}

Vector v_update_marginal(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& nu_masses) {
  check_shapes(kernel, duals);
  if (nu_masses.size() != duals.v.size()) throw ShapeError("v_update_marginal: nu does not match the kernel");
  if ((nu_masses.array() <= 0.0).any()) throw DomainError("v_update_marginal: nu masses must be strictly positive");
  const double eps = kernel.epsilon;
  return eps * (nu_masses.array().log() - column_log_mass(kernel, duals.u).array());
}

Vector v_update_congestion(const GibbsKernel& kernel, const DualPotentials& duals, const CongestionSpec& spec,
                           const Grid1D& grid) {
  check_shapes(kernel, duals);
  if (grid.n_cells != duals.v.size()) throw ShapeError("v_update_congestion: grid does not match the kernel");
  const double eps = kernel.epsilon;
  const double log_dy = std::log(grid.dy());
  const Vector log_mass = column_log_mass(kernel, duals.u);
  Vector v(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) {
    const double potential = spec.potential.value(grid.midpoint(j));
    const double offset = log_mass(j) - log_dy;
    auto h = [&](double t) { return t + potential + spec.fprime_of_log(t / eps + offset); };
    auto slope = [&](double t) {
      const double rho = std::exp(t / eps + offset);
      const double curvature = rho > 0.0 && std::isfinite(rho) ? spec.fsecond(rho) * rho : 1.0;
      return 1.0 + curvature / eps;
    };

    const double start = std::isfinite(duals.v(j)) ? duals.v(j) : 0.0;
    double step = std::max(1.0, std::abs(start));
    double lo = start;
    double hi = start;
    while (h(lo) >= 0.0 && step < 1e300) {
      lo -= step;
      step *= 2.0;
    }
    step = std::max(1.0, std::abs(start));
    while (h(hi) <= 0.0 && step < 1e300) {
      hi += step;
      step *= 2.0;
    }
    if (!(h(lo) < 0.0 && h(hi) > 0.0))
      throw ConvergenceError("v_update_congestion: no bracket for column " + std::to_string(j));

    double t = start;
    bool done = false;
    for (int it = 0; it < 200 && !done; ++it) {
      const double value = h(t);
      if (std::abs(value) <= 1e-10) {
        done = true;
        break;
      }
      if (value < 0.0) lo = t;
      else hi = t;
      const double newton = t - value / slope(t);
      t = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) done = true;
    }
    if (!(std::abs(h(t)) <= 1e-8))
      throw ConvergenceError("v_update_congestion: scalar solve failed for column " + std::to_string(j));
    v(j) = t;
  }
  return v;
}

Vector v_update_congestion_closed_form(const GibbsKernel& kernel, const DualPotentials& duals,
                                       const CongestionSpec& spec, const Grid1D& grid) {
  check_shapes(kernel, duals);
  if (grid.n_cells != duals.v.size()) throw ShapeError("v_update_congestion: grid does not match the kernel");
  const double eps = kernel.epsilon;
  const double log_dy = std::log(grid.dy());
  const Vector log_mass = column_log_mass(kernel, duals.u);
  Vector v(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) {
    const double potential = spec.potential.value(grid.midpoint(j));
    v(j) = -eps * (potential + 1.0 + spec.fprime_shift + log_mass(j) - log_dy) / (1.0 + eps);
  }
  return v;
}

Vector v_update_interaction(const InteractionSpec& spec, const GridMeasure1D& nu_prev) {
  const InteractionField field(spec, nu_prev);
  const Grid1D& grid = nu_prev.grid();
  Vector v(grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) v(j) = -field.value(grid.midpoint(j));
  return v;
}

double dual_objective_marginal(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& mu_weights,
                               const Vector& nu_masses) {
  return mu_weights.dot(duals.u) + nu_masses.dot(duals.v) - kernel.epsilon * total_mass(kernel, duals);
}

double dual_objective_congestion(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& mu_weights,
                                 const CongestionSpec& spec, const Grid1D& grid) {
  double conjugate = 0.0;
  for (Index j = 0; j < grid.n_cells; ++j)
    conjugate += grid.dy() * spec.conjugate(-duals.v(j) - spec.potential.value(grid.midpoint(j)));
  return mu_weights.dot(duals.u) - conjugate - kernel.epsilon * total_mass(kernel, duals);
}

SinkhornResult solve_sinkhorn(const CostModel& cost, const PointCloudMeasure& mu, const SinkhornFunctional& functional,
                              const Grid1D& grid, double epsilon, const SolverConfig& config,
                              const std::optional<GridMeasure1D>& nu0, bool keep_coupling) {
  config.validate();
  if (!(epsilon > 0.0)) throw DomainError("solve_sinkhorn: epsilon must be > 0");
  if (nu0 && !(nu0->grid() == grid)) throw ShapeError("solve_sinkhorn: nu0 lives on a different grid");
  const auto* fixed = std::get_if<FixedMarginal>(&functional);
  if (fixed != nullptr && !(fixed->nu.grid() == grid)) throw ShapeError("solve_sinkhorn: target nu grid differs");

  const Matrix costs = cost_matrix(cost, mu, grid);
  const GibbsKernel kernel = GibbsKernel::from_cost(costs, epsilon);
  const Vector& weights = mu.weights();

  GridMeasure1D nu = nu0 ? *nu0 : GridMeasure1D::uniform(grid);
  DualPotentials duals{Vector::Zero(mu.size()), Vector::Zero(grid.n_cells)};
  duals.u = u_update(kernel, duals, weights);

  SinkhornResult result{.equilibrium = {.nu = nu, .profile = make_profile(grid, Vector::Zero(grid.n_cells))},
                        .duals = duals};
  EquilibriumResult& eq = result.equilibrium;

  for (int it = 1; it <= config.max_iters; ++it) {
    double objective = 0.0;
    if (fixed != nullptr) {
      duals.v = v_update_marginal(kernel, duals, fixed->nu.masses());
    } else if (const auto* congestion = std::get_if<CongestionSpec>(&functional)) {
      duals.v = v_update_congestion(kernel, duals, *congestion, grid);
    } else {
      duals.v = v_update_interaction(std::get<InteractionSpec>(functional), nu);
    }
    duals.u = u_update(kernel, duals, weights);

    const Vector rows = row_marginal(kernel, duals);
    result.row_residual_history.push_back(((rows - weights).array().abs() / weights.array()).maxCoeff());

    if (fixed != nullptr)
      objective = dual_objective_marginal(kernel, duals, weights, fixed->nu.masses());
    else if (const auto* congestion = std::get_if<CongestionSpec>(&functional))
      objective = dual_objective_congestion(kernel, duals, weights, *congestion, grid);
    else
      objective = weights.dot(duals.u) - epsilon * total_mass(kernel, duals);
    result.dual_objective_history.push_back(objective);

    GridMeasure1D next = normalize(column_marginal(kernel, duals), grid);
    const double delta = l1_distance(next, fixed != nullptr ? fixed->nu : nu);
    eq.history.push_back(delta);
    eq.residual_history.push_back(result.row_residual_history.back());
    nu = std::move(next);
    eq.iterations = it;
    if (delta <= config.tol_l1) {
      eq.converged = true;
      break;
    }
  }

  const Matrix gamma = coupling(kernel, duals);
  result.transport_cost = gamma.cwiseProduct(costs).sum();
  if (keep_coupling) result.coupling = gamma;
  result.duals = duals;
  eq.residual = eq.history.empty() ? 0.0 : eq.history.back();
  eq.profile = level_profile(cost, mu, nu, config.k_tol);
  eq.map = assign_map(cost, mu, eq.profile);
  eq.nu = std::move(nu);
  return result;
}

}  // namespace cournot
