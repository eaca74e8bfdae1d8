#pragma once

#include <functional>
#include <vector>

#include "cournot/cost_model.hpp"
#include "cournot/measures.hpp"
#include "cournot/transport.hpp"

namespace cournot {

/// Potential V on Y with its first two derivatives.
struct Potential {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> second;

  static Potential zero();
  /// strength * (y - center)^2
  static Potential quadratic(double strength, double center);
  /// V + constant (derivatives unchanged).
  Potential shifted(double constant) const;

  Vector on_grid(const Grid1D& grid) const;
};

enum class CongestionKind { Entropy };

/// Congestion term f. Only the entropy f(t) = t log t + shift * t ships; the
/// shift moves f' by a constant and leaves every equilibrium unchanged.
struct CongestionSpec {
  CongestionKind kind = CongestionKind::Entropy;
  double fprime_shift = 0.0;
  Potential potential = Potential::zero();

  double f(double t) const;
  double fprime(double t) const;
  /// f'(exp(log_t)), finite for every log_t.
  double fprime_of_log(double log_t) const;
  double fsecond(double t) const;
  /// (f')^{-1}(s), defined and positive on all of R.
  double fprime_inverse(double s) const;
  /// Convex conjugate f*(q) = sup_t q t - f(t).
  double conjugate(double q) const;
};

struct SolverConfig {
  int max_iters = 500;
  double tol_l1 = 1e-6;
  double k_tol = 1e-12;
  double damping = 1.0;

  void validate() const;
};

struct EquilibriumResult {
  GridMeasure1D nu;
  LevelProfile profile;
  AssignmentMap map;
  int iterations = 0;
  bool converged = false;
  /// L1 change of nu at each iteration.
  std::vector<double> history;
  /// Solver-specific residual recorded alongside history.
  std::vector<double> residual_history;
  /// Discrete energy of the iterate entering each iteration (congestion only).
  std::vector<double> energy_history;
  double residual = 0.0;
  /// Best replies clamped to an end of Y (best-reply only).
  Index boundary_clamped = 0;
  /// Best replies that fell back to golden-section search (best-reply only).
  Index convexity_fallbacks = 0;
};

/// nu proportional to (f')^{-1}(C - V(y_j) - v_j); the constant is fixed by
/// normalization.
GridMeasure1D congestion_update(const LevelProfile& profile, const CongestionSpec& spec);

/// sup_j |v_j + f'(nu_j) + V_j - C| with C the median of v + f'(nu) + V.
double optimality_residual(const LevelProfile& profile, const GridMeasure1D& nu, const CongestionSpec& spec);
double optimality_residual(const EquilibriumResult& result, const CongestionSpec& spec);

/// transport cost of the nested coupling + sum f(nu_j) dy + sum V_j nu_j dy.
double congestion_energy(const CostModel& cost, const PointCloudMeasure& mu, const GridMeasure1D& nu,
                         const AssignmentMap& map, const CongestionSpec& spec);

/// Alternates level_profile and congestion_update (optionally damped) from nu0.
EquilibriumResult solve_congestion(const CostModel& cost, const PointCloudMeasure& mu, const CongestionSpec& spec,
                                   const GridMeasure1D& nu0, const SolverConfig& config);

/// Exact L1 distance sum |a_j - b_j| dy on a shared grid.
double l1_distance(const GridMeasure1D& a, const GridMeasure1D& b);

}  // namespace cournot
