#pragma once

#include <functional>

#include "cournot/congestion.hpp"
#include "cournot/cost_model.hpp"
#include "cournot/measures.hpp"

namespace cournot {

/// Symmetric pairwise interaction phi(y, z) with its first two y-derivatives.
struct Interaction {
  std::function<double(double, double)> value;
  std::function<double(double, double)> dy;
  std::function<double(double, double)> dyy;

  static Interaction none();
  /// strength * |y - z|^2
  static Interaction quadratic(double strength = 1.0);
};

/// F(y, nu) = V(y) + integral of phi(y, z) dnu(z).
struct InteractionSpec {
  Potential potential = Potential::zero();
  Interaction interaction = Interaction::none();
};

/// y -> V(y) + sum_l phi(y, y_l) nu_l dy for a frozen nu, with derivatives.
class InteractionField {
 public:
  InteractionField(const InteractionSpec& spec, const GridMeasure1D& nu);

  double value(double y) const;
  double derivative(double y) const;
  double second(double y) const;
  const Grid1D& grid() const { return grid_; }

 private:
  const InteractionSpec* spec_;
  Grid1D grid_;
  Vector nodes_;
  Vector masses_;
};

struct BestReply {
  double y = 0.0;
  bool clamped = false;
  /// The objective failed the convexity spot-check; golden-section search was used.
  bool convexity_fallback = false;
};

/// c(x, y) + V(y) + sum_l phi(y, y_l) nu_l dy.
double agent_cost(const CostModel& cost, const InteractionField& field, PointRef x, double y);

/// Minimizer over [y_min, y_max] of agent_cost: root of its derivative by
/// safeguarded Newton (|derivative| <= 1e-10 or bracket <= 1e-12), or an end
/// point when the derivative keeps one sign.
BestReply best_reply_point(const CostModel& cost, const InteractionField& field, PointRef x);
BestReply best_reply_point(const CostModel& cost, const InteractionSpec& spec, const GridMeasure1D& nu, PointRef x);

/// Deposits each weight linearly on the two nearest midpoints (the end cells
/// absorb the outer share) and returns the density.
GridMeasure1D push_forward(const Vector& replies, const PointCloudMeasure& mu, const Grid1D& grid);

/// nu <- push_forward(B_nu), optionally damped, until the L1 change drops
/// below tol_l1. The returned map holds B_{nu*}; residual is
/// ||push_forward(B_{nu*}) - nu*||_1.
EquilibriumResult solve_bestreply(const CostModel& cost, const PointCloudMeasure& mu, const InteractionSpec& spec,
                                  const GridMeasure1D& nu0, const SolverConfig& config);

}  // namespace cournot
