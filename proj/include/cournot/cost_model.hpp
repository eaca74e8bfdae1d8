#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cournot/measures.hpp"

namespace cournot {

using PointRef = Eigen::Ref<const Eigen::VectorXd>;

/// The level set {x : dy_c(x, y) = k} as the line normal . x = offset, with
/// |normal| = 1. Only costs whose dy_c is affine in x provide one.
struct LinearLevelSet {
  Eigen::Vector2d normal;
  double offset = 0.0;
};

/// Transport cost c(x, y) for y in R and x in R^m together with the
/// derivatives the level-set construction needs. Implementations are
/// stateless after construction.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual std::string name() const = 0;
  virtual double c(PointRef x, double y) const = 0;
  virtual double dy_c(PointRef x, double y) const = 0;
  virtual double dyy_c(PointRef x, double y) const = 0;
  virtual Eigen::VectorXd grad_x_dy_c(PointRef x, double y) const = 0;

  virtual std::optional<LinearLevelSet> linear_level_set(double /*y*/, double /*k*/) const {
    return std::nullopt;
  }
};

/// c(x, y) = |x1 - cos y|^2 + |x2 - sin y|^2.
class ArcQuadraticCost final : public CostModel {
 public:
  std::string name() const override { return "arc_quadratic"; }
  double c(PointRef x, double y) const override;
  double dy_c(PointRef x, double y) const override;
  double dyy_c(PointRef x, double y) const override;
  Eigen::VectorXd grad_x_dy_c(PointRef x, double y) const override;
  std::optional<LinearLevelSet> linear_level_set(double y, double k) const override;
};

/// c(x, y) = (1 + q)^(p/2) with q the arc-quadratic cost, p > 2.
///
/// With a = p/2, q_y = 2(x1 sin y - x2 cos y), q_yy = 2(x1 cos y + x2 sin y),
/// grad_x q = 2(x - e(y)) and grad_x q_y = 2(sin y, -cos y):
///   c_y        = a (1+q)^(a-1) q_y
///   c_yy       = a(a-1) (1+q)^(a-2) q_y^2 + a (1+q)^(a-1) q_yy
///   grad_x c_y = a(a-1) (1+q)^(a-2) q_y grad_x q + a (1+q)^(a-1) grad_x q_y
class ArcPowerCost final : public CostModel {
 public:
  explicit ArcPowerCost(double p);

  double p() const { return p_; }
  std::string name() const override { return "arc_power"; }
  double c(PointRef x, double y) const override;
  double dy_c(PointRef x, double y) const override;
  double dyy_c(PointRef x, double y) const override;
  Eigen::VectorXd grad_x_dy_c(PointRef x, double y) const override;

 private:
  double p_;
};

/// c == 0. Used as a degenerate baseline in tests and oracles.
class ZeroCost final : public CostModel {
 public:
  explicit ZeroCost(Index dim = 2) : dim_(dim) {}
  std::string name() const override { return "zero"; }
  double c(PointRef, double) const override { return 0.0; }
  double dy_c(PointRef, double) const override { return 0.0; }
  double dyy_c(PointRef, double) const override { return 0.0; }
  Eigen::VectorXd grad_x_dy_c(PointRef, double) const override { return Eigen::VectorXd::Zero(dim_); }

 private:
  Index dim_;
};

/// Builds a shipped cost by name: "arc_quadratic" or "arc_power" (needs p).
std::unique_ptr<CostModel> make_cost(const std::string& name, std::optional<double> p = std::nullopt);

struct DerivativeReport {
  double dy_c = 0.0;
  double dyy_c = 0.0;
  double grad_x_dy_c = 0.0;

  double worst() const;
};

/// Max relative error of each analytic derivative against a centered
/// difference (step 1e-5) over samples drawn from the quarter disk x (0, pi/2).
DerivativeReport check_derivatives(const CostModel& cost, int samples, std::uint64_t seed);

struct SlopeRange {
  double k_lo = 0.0;
  double k_hi = 0.0;
};

/// min / max of dy_c(x_i, y) over the support of mu.
SlopeRange dy_c_range(const CostModel& cost, const PointCloudMeasure& mu, double y);

/// M x N matrix of dy_c(x_i, y_j) at the grid midpoints.
Matrix dy_c_matrix(const CostModel& cost, const PointCloudMeasure& mu, const Grid1D& grid);
/// M x N matrix of c(x_i, y_j) at the grid midpoints.
Matrix cost_matrix(const CostModel& cost, const PointCloudMeasure& mu, const Grid1D& grid);

}  // namespace cournot
