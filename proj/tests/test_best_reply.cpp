#include <doctest.h>

#include <cmath>
#include <random>

#include "cournot/best_reply.hpp"
#include "cournot/cost_model.hpp"
#include "cournot/errors.hpp"
#include "support.hpp"

using namespace cournot;
using testing::kPi;

namespace {

InteractionSpec fig3_spec() { return {Potential::quadratic(1.0, kPi / 12.0), Interaction::quadratic(1.0)}; }

Eigen::VectorXd on_circle(double a, double r = 1.0) { return Eigen::Vector2d(r * std::cos(a), r * std::sin(a)); }

GridMeasure1D hot_cell(const Grid1D& grid, Index j) {
  Vector d = Vector::Zero(grid.n_cells);
  d(j) = 1.0;
  return normalize(d, grid);
}

}  // namespace

TEST_CASE("interaction field sums over the frozen density") {
  const Grid1D grid(0.0, 1.0, 4);
  const GridMeasure1D nu(grid, Vector(Eigen::Vector4d(0.4, 0.8, 1.2, 1.6)));
  const InteractionSpec spec{Potential::quadratic(2.0, 0.3), Interaction::quadratic(1.5)};
  const InteractionField field(spec, nu);
  const double y = 0.55;
  double value = 2.0 * (y - 0.3) * (y - 0.3);
  double slope = 4.0 * (y - 0.3);
  for (Index l = 0; l < 4; ++l) {
    const double z = grid.midpoint(l);
    const double m = nu.density(l) * grid.dy();
    value += 1.5 * (y - z) * (y - z) * m;
    slope += 3.0 * (y - z) * m;
  }
  CHECK(field.value(y) == doctest::Approx(value).epsilon(1e-14));
  CHECK(field.derivative(y) == doctest::Approx(slope).epsilon(1e-14));
  CHECK(field.second(y) == doctest::Approx(4.0 + 3.0).epsilon(1e-14));
}

TEST_CASE("best reply by symmetry") {
  const ArcQuadraticCost quad;
  const Grid1D grid(0.0, kPi / 2.0, 200);
  for (const double a : {0.2, 0.7, 1.1}) {
    const InteractionSpec alone{Potential::quadratic(1.0, a), Interaction::none()};
    const BestReply b = best_reply_point(quad, alone, GridMeasure1D::uniform(grid), on_circle(a));
    CHECK(b.y == doctest::Approx(a).epsilon(1e-10));
    CHECK_FALSE(b.clamped);
    CHECK_FALSE(b.convexity_fallback);
  }
  // Cost, potential and a single hot cell all pull toward the same point.
  const Index j = 60;
  const double m = grid.midpoint(j);
  const InteractionSpec all{Potential::quadratic(1.0, m), Interaction::quadratic(1.0)};
  CHECK(best_reply_point(quad, all, hot_cell(grid, j), on_circle(m)).y == doctest::Approx(m).epsilon(1e-10));
}

TEST_CASE("best reply against a dense scan") {
  const ArcQuadraticCost quad;
  const Grid1D grid(0.0, kPi / 2.0, 200);
  const Index j = 30;
  const double m = grid.midpoint(j);
  const InteractionSpec spec{Potential::quadratic(1.0, 0.4), Interaction::quadratic(1.0)};
  for (const double a : {0.1, 0.3, 0.9}) {
    // x on the unit circle: c(x, y) = 2 - 2 cos(y - a).
    auto objective = [&](double y) {
      return 2.0 - 2.0 * std::cos(y - a) + (y - 0.4) * (y - 0.4) + (y - m) * (y - m);
    };
    double best_y = 0.0;
    double best = objective(0.0);
    const int steps = 1600000;
    for (int s = 1; s <= steps; ++s) {
      const double y = grid.y_max * s / steps;
      if (const double f = objective(y); f < best) {
        best = f;
        best_y = y;
      }
    }
    CHECK(std::abs(best_reply_point(quad, spec, hot_cell(grid, j), on_circle(a)).y - best_y) <= 1e-6);
  }
}

TEST_CASE("best reply clamps and falls back") {
  const ArcQuadraticCost quad;
  const Grid1D grid(0.3, 0.8, 50);
  const InteractionSpec spec{Potential::zero(), Interaction::none()};
  const BestReply low = best_reply_point(quad, spec, GridMeasure1D::uniform(grid), on_circle(0.1, 0.5));
  CHECK(low.y == grid.y_min);
  CHECK(low.clamped);
  const BestReply high = best_reply_point(quad, spec, GridMeasure1D::uniform(grid), on_circle(1.2, 0.5));
  CHECK(high.y == grid.y_max);
  CHECK(high.clamped);

  // A strongly concave potential breaks convexity; the minimum of
  // -10 (y - 0.55)^2 plus a small cost sits at an end point.
  const InteractionSpec concave{Potential::quadratic(-10.0, 0.55), Interaction::none()};
  const Eigen::VectorXd x = on_circle(0.5, 0.2);
  const BestReply b = best_reply_point(quad, concave, GridMeasure1D::uniform(grid), x);
  CHECK(b.convexity_fallback);
  const InteractionField field(concave, GridMeasure1D::uniform(grid));
  const double at_lo = agent_cost(quad, field, x, grid.y_min);
  const double at_hi = agent_cost(quad, field, x, grid.y_max);
  CHECK(agent_cost(quad, field, x, b.y) <= std::min(at_lo, at_hi) + 1e-12);
}

TEST_CASE("push_forward") {
  const Grid1D grid(0.0, 1.0, 10);
  const PointCloudMeasure two(Matrix::Zero(2, 2), Vector::Constant(2, 0.5));
  const GridMeasure1D one_cell = push_forward(Vector::Constant(2, grid.midpoint(3)), two, grid);
  CHECK(one_cell.density(3) == doctest::Approx(1.0 / grid.dy()));
  CHECK(support_size(one_cell) == 1);

  const GridMeasure1D adjacent =
      push_forward(Vector(Eigen::Vector2d(grid.midpoint(3), grid.midpoint(4))), two, grid);
  CHECK(adjacent.density(3) == doctest::Approx(0.5 / grid.dy()));
  CHECK(adjacent.density(4) == doctest::Approx(0.5 / grid.dy()));

  const GridMeasure1D ends = push_forward(Vector(Eigen::Vector2d(0.0, 1.0)), two, grid);
  CHECK(ends.density(0) == doctest::Approx(0.5 / grid.dy()));
  CHECK(ends.density(9) == doctest::Approx(0.5 / grid.dy()));
  CHECK_THROWS_AS(push_forward(Vector(Eigen::Vector2d(0.0, 1.5)), two, grid), DomainError);

  // Quantiles of the density (1 + y) / 1.5 on (0, 1).
  const Index m = 20000;
  Vector replies(m);
  for (Index i = 0; i < m; ++i) {
    const double u = (i + 0.5) / m;
    replies(i) = -1.0 + std::sqrt(1.0 + 3.0 * u);
  }
  const PointCloudMeasure cloud(Matrix::Zero(2, m), Vector::Constant(m, 1.0 / m));
  const Grid1D fine(0.0, 1.0, 50);
  const GridMeasure1D linear = push_forward(replies, cloud, fine);
  double worst = 0.0;
  for (Index j = 0; j < 50; ++j)
    worst = std::max(worst, std::abs(linear.density(j) - (1.0 + fine.midpoint(j)) / 1.5));
  CHECK(worst <= 2.0 * fine.dy());
  CHECK(std::abs(linear.mean() - replies.mean()) <= fine.dy());
}

TEST_CASE("fig3 reaches a Cournot-Nash equilibrium with a narrow support") {
  const ArcQuadraticCost quad;
  const PointCloudMeasure mu = testing::quarter_disk();
  const Grid1D grid(0.0, kPi / 2.0, 200);
  const InteractionSpec spec = fig3_spec();
  const EquilibriumResult r =
      solve_bestreply(quad, mu, spec, GridMeasure1D::uniform_on(grid, 0.0, kPi / 6.0), SolverConfig{});
  REQUIRE(r.converged);
  CHECK(r.residual <= 1e-5);
  CHECK(support_size(r.nu) < 100);
  CHECK(r.convexity_fallbacks == 0);

  const InteractionField field(spec, r.nu);
  double worst = 0.0;
  for (Index i = 0; i < mu.size(); ++i) {
    const double achieved = agent_cost(quad, field, mu.point(i), r.map.assigned_y(i));
    double best = achieved;
    for (Index j = 0; j < grid.n_cells; ++j) best = std::min(best, agent_cost(quad, field, mu.point(i), grid.midpoint(j)));
    worst = std::max(worst, achieved - best);
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("power cost spreads the support") {
  const PointCloudMeasure mu = testing::quarter_disk(2500);
  const Grid1D grid(0.0, kPi / 2.0, 200);
  const GridMeasure1D nu0 = GridMeasure1D::uniform_on(grid, 0.0, kPi / 6.0);
  const ArcQuadraticCost quad;
  const ArcPowerCost p4(4.0);
  const EquilibriumResult a = solve_bestreply(quad, mu, fig3_spec(), nu0, SolverConfig{});
  const EquilibriumResult b = solve_bestreply(p4, mu, fig3_spec(), nu0, SolverConfig{});
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(support_size(b.nu) > support_size(a.nu));
}

TEST_CASE("single agent is fixed after one step") {
  const ArcQuadraticCost quad;
  const Grid1D grid(0.0, kPi / 2.0, 100);
  const PointCloudMeasure mu = testing::single_point(0.5 * std::cos(0.4), 0.5 * std::sin(0.4));
  const InteractionSpec spec{Potential::quadratic(1.0, 0.9), Interaction::none()};
  const EquilibriumResult r = solve_bestreply(quad, mu, spec, GridMeasure1D::uniform(grid), SolverConfig{});
  CHECK(r.converged);
  CHECK(r.iterations <= 2);
  CHECK(support_size(r.nu) <= 2);
  CHECK(r.nu.mean() == doctest::Approx(r.map.assigned_y(0)).epsilon(1e-12));
  CHECK(r.residual <= 1e-12);
}
