#include "cournot/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

struct ArcTerms {
  double q;     // |x - e(y)|^2
  double qy;    // d/dy q
  double qyy;   // d2/dy2 q
};

ArcTerms arc_terms(PointRef x, double y) {
  const double s = std::sin(y);
  const double c = std::cos(y);
  const double d1 = x(0) - c;
  const double d2 = x(1) - s;
  return {d1 * d1 + d2 * d2, 2.0 * (x(0) * s - x(1) * c), 2.0 * (x(0) * c + x(1) * s)};
}

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

}  // namespace

double ArcQuadraticCost::c(PointRef x, double y) const { return arc_terms(x, y).q; }

double ArcQuadraticCost::dy_c(PointRef x, double y) const {
  return 2.0 * (x(0) * std::sin(y) - x(1) * std::cos(y));
}

double ArcQuadraticCost::dyy_c(PointRef x, double y) const {
  return 2.0 * (x(0) * std::cos(y) + x(1) * std::sin(y));
}

Eigen::VectorXd ArcQuadraticCost::grad_x_dy_c(PointRef, double y) const {
  Eigen::VectorXd g(2);
  g << 2.0 * std::sin(y), -2.0 * std::cos(y);
  return g;
}

std::optional<LinearLevelSet> ArcQuadraticCost::linear_level_set(double y, double k) const {
  // 2 (x1 sin y - x2 cos y) = k
  return LinearLevelSet{Eigen::Vector2d(std::sin(y), -std::cos(y)), 0.5 * k};
}

// With a = p/2 and q = |x - e(y)|^2, chain rule on c = (1 + q)^a:
//   dy_c  = a (1+q)^(a-1) q_y
//   dyy_c = a (a-1) (1+q)^(a-2) q_y^2 + a (1+q)^(a-1) q_yy
//   grad_x dy_c = a (a-1) (1+q)^(a-2) q_y grad_x q + a (1+q)^(a-1) grad_x q_y
// where q_y = 2 (x1 sin y - x2 cos y), q_yy = 2 (x1 cos y + x2 sin y),
// grad_x q = 2 (x - e(y)) and grad_x q_y = 2 (sin y, -cos y).
ArcPowerCost::ArcPowerCost(double p) : p_(p) {
  if (!(p > 2.0)) throw DomainError("ArcPowerCost: p must be > 2");
}

double ArcPowerCost::c(PointRef x, double y) const {
  return std::pow(1.0 + arc_terms(x, y).q, 0.5 * p_);
}

double ArcPowerCost::dy_c(PointRef x, double y) const {
  const ArcTerms t = arc_terms(x, y);
  const double a = 0.5 * p_;
  return a * std::pow(1.0 + t.q, a - 1.0) * t.qy;
}

double ArcPowerCost::dyy_c(PointRef x, double y) const {
  const ArcTerms t = arc_terms(x, y);
  const double a = 0.5 * p_;
  const double base = 1.0 + t.q;
  return a * (a - 1.0) * std::pow(base, a - 2.0) * t.qy * t.qy + a * std::pow(base, a - 1.0) * t.qyy;
}

Eigen::VectorXd ArcPowerCost::grad_x_dy_c(PointRef x, double y) const {
  const ArcTerms t = arc_terms(x, y);
  const double a = 0.5 * p_;
  const double base = 1.0 + t.q;
  const double s = std::sin(y);
  const double c = std::cos(y);
  const double outer = a * (a - 1.0) * std::pow(base, a - 2.0) * t.qy;
  const double inner = a * std::pow(base, a - 1.0);
  Eigen::VectorXd g(2);
  g << outer * 2.0 * (x(0) - c) + inner * 2.0 * s, outer * 2.0 * (x(1) - s) - inner * 2.0 * c;
  return g;
}

std::unique_ptr<CostModel> make_cost(const std::string& name, std::optional<double> p) {
  if (name == "arc_quadratic") return std::make_unique<ArcQuadraticCost>();
  if (name == "arc_power") {
    if (!p) throw DomainError("make_cost: arc_power requires p");
    return std::make_unique<ArcPowerCost>(*p);
  }
  if (name == "zero") return std::make_unique<ZeroCost>();
  throw DomainError("make_cost: unknown cost '" + name + "'");
}

double DerivativeReport::worst() const { return std::max({dy_c, dyy_c, grad_x_dy_c}); }

DerivativeReport check_derivatives(const CostModel& cost, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("check_derivatives: samples must be >= 1");
  constexpr double h = 1e-5;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DerivativeReport report;
  for (int s = 0; s < samples; ++s) {
    const double r = std::sqrt(unit(rng));
    const double theta = 0.5 * std::numbers::pi * unit(rng);
    const double y = 0.5 * std::numbers::pi * unit(rng);
    Eigen::VectorXd x(2);
    x << r * std::cos(theta), r * std::sin(theta);

    const double fd_y = (cost.c(x, y + h) - cost.c(x, y - h)) / (2.0 * h);
    report.dy_c = std::max(report.dy_c, relative_error(cost.dy_c(x, y), fd_y));

    const double fd_yy = (cost.dy_c(x, y + h) - cost.dy_c(x, y - h)) / (2.0 * h);
    report.dyy_c = std::max(report.dyy_c, relative_error(cost.dyy_c(x, y), fd_yy));

    const Eigen::VectorXd grad = cost.grad_x_dy_c(x, y);
    for (Index d = 0; d < x.size(); ++d) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(d) += h;
      xm(d) -= h;
      const double fd = (cost.dy_c(xp, y) - cost.dy_c(xm, y)) / (2.0 * h);
      report.grad_x_dy_c = std::max(report.grad_x_dy_c, relative_error(grad(d), fd));
    }
  }
  return report;
}

SlopeRange dy_c_range(const CostModel& cost, const PointCloudMeasure& mu, double y) {
  SlopeRange range{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (Index i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0.0) continue;
    const double d = cost.dy_c(mu.point(i), y);
    range.k_lo = std::min(range.k_lo, d);
    range.k_hi = std::max(range.k_hi, d);
  }
  if (range.k_lo > range.k_hi) throw DomainError("dy_c_range: measure has no support");
  return range;
}

Matrix dy_c_matrix(const CostModel& cost, const PointCloudMeasure& mu, const Grid1D& grid) {
  Matrix d(mu.size(), grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) {
    const double y = grid.midpoint(j);
    for (Index i = 0; i < mu.size(); ++i) d(i, j) = cost.dy_c(mu.point(i), y);
  }
  return d;
}

Matrix cost_matrix(const CostModel& cost, const PointCloudMeasure& mu, const Grid1D& grid) {
  Matrix c(mu.size(), grid.n_cells);
  for (Index j = 0; j < grid.n_cells; ++j) {
    const double y = grid.midpoint(j);
    for (Index i = 0; i < mu.size(); ++i) c(i, j) = cost.c(mu.point(i), y);
  }
  return c;
}

}  // namespace cournot
