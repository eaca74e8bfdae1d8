#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "cournot/best_reply.hpp"
#include "cournot/congestion.hpp"
#include "cournot/cost_model.hpp"
#include "cournot/measures.hpp"

namespace cournot {

/// log of the Gibbs kernel exp(-c / eps), kept in log form throughout.
struct GibbsKernel {
  Matrix log_kernel;  // M x N, -c_ij / eps
  double epsilon = 1.0;

  static GibbsKernel from_cost(const Matrix& cost, double epsilon);
  static GibbsKernel from_cost(const CostModel& cost, const PointCloudMeasure& mu, const Grid1D& grid, double epsilon);
};

struct DualPotentials {
  Vector u;  // length M
  Vector v;  // length N
};

/// gamma_ij = exp((u_i + v_j - c_ij) / eps). Entries are masses.
Matrix coupling(const GibbsKernel& kernel, const DualPotentials& duals);
Vector row_marginal(const GibbsKernel& kernel, const DualPotentials& duals);
Vector column_marginal(const GibbsKernel& kernel, const DualPotentials& duals);

/// L_j = logsumexp_i((u_i - c_ij) / eps); the column mass is exp(v_j / eps + L_j).
Vector column_log_mass(const GibbsKernel& kernel, const Vector& u);

/// u_i = eps log mu_i - eps logsumexp_j((v_j - c_ij) / eps); the rows of the
/// resulting coupling sum to mu.
Vector u_update(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& mu_weights);

/// v_j = eps log nu_j - eps logsumexp_i((u_i - c_ij) / eps) for a fixed target
/// of cell masses nu_j.
Vector v_update_marginal(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& nu_masses);

/// Per column, the root of v + V_j + f'(m_j(v) / dy) where m_j(v) is the
/// implied column mass, by safeguarded Newton on a bracket. Throws
/// ConvergenceError naming the column if a root is not found to 1e-10.
Vector v_update_congestion(const GibbsKernel& kernel, const DualPotentials& duals, const CongestionSpec& spec,
                           const Grid1D& grid);

/// Entropy closed form of the same root:
///   v_j = -eps (V_j + 1 + shift + L_j - log dy) / (1 + eps).
Vector v_update_congestion_closed_form(const GibbsKernel& kernel, const DualPotentials& duals,
                                       const CongestionSpec& spec, const Grid1D& grid);

/// Semi-implicit step: v_j = -(V_j + sum_l phi(y_j, y_l) nu_prev_l dy).
Vector v_update_interaction(const InteractionSpec& spec, const GridMeasure1D& nu_prev);

/// sum_i mu_i u_i + sum_j nu_j v_j - eps sum_ij gamma_ij.
double dual_objective_marginal(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& mu_weights,
                               const Vector& nu_masses);
/// sum_i mu_i u_i - sum_j dy f*(-v_j - V_j) - eps sum_ij gamma_ij.
double dual_objective_congestion(const GibbsKernel& kernel, const DualPotentials& duals, const Vector& mu_weights,
                                 const CongestionSpec& spec, const Grid1D& grid);

/// Pure transport: the column marginal is pinned to nu.
struct FixedMarginal {
  GridMeasure1D nu;
};

using SinkhornFunctional = std::variant<FixedMarginal, CongestionSpec, InteractionSpec>;

struct SinkhornResult {
  EquilibriumResult equilibrium;
  DualPotentials duals;
  /// Dual objective after each full sweep (the frozen-interaction objective
  /// in the interaction case).
  std::vector<double> dual_objective_history;
  /// max_i |row_i - mu_i| / mu_i right after each u_update.
  std::vector<double> row_residual_history;
  /// sum_ij gamma_ij c_ij at the final duals.
  double transport_cost = 0.0;
  std::optional<Matrix> coupling;
};

/// Sweeps v_update (by functional), then u_update, then reads nu off the
/// column marginal. Stops once the L1 change of nu between sweeps is at most
/// config.tol_l1; for FixedMarginal the L1 gap to the target is used instead.
SinkhornResult solve_sinkhorn(const CostModel& cost, const PointCloudMeasure& mu, const SinkhornFunctional& functional,
                              const Grid1D& grid, double epsilon, const SolverConfig& config,
                              const std::optional<GridMeasure1D>& nu0 = std::nullopt, bool keep_coupling = false);

}  // namespace cournot
