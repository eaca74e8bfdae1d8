#include <doctest.h>

#include <cmath>
#include <random>

#include "cournot/cost_model.hpp"
#include "cournot/errors.hpp"
#include "support.hpp"

using namespace cournot;
using testing::kPi;

namespace {

// Independent centered difference in y, checked here with a coarser and a
// finer step than the library uses.
double fd_y(const CostModel& cost, const Eigen::VectorXd& x, double y, double h) {
  return (cost.c(x, y + h) - cost.c(x, y - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("arc quadratic closed forms") {
  const ArcQuadraticCost cost;
  Eigen::VectorXd x(2);
  x << 0.3, 0.4;
  const double y = 0.7;
  const double c = (0.3 - std::cos(y)) * (0.3 - std::cos(y)) + (0.4 - std::sin(y)) * (0.4 - std::sin(y));
  CHECK(cost.c(x, y) == doctest::Approx(c).epsilon(1e-15));
  CHECK(cost.dy_c(x, y) == doctest::Approx(2.0 * (0.3 * std::sin(y) - 0.4 * std::cos(y))).epsilon(1e-15));
  CHECK(cost.dyy_c(x, y) == doctest::Approx(2.0 * (0.3 * std::cos(y) + 0.4 * std::sin(y))).epsilon(1e-15));
  const Eigen::VectorXd g = cost.grad_x_dy_c(x, y);
  CHECK(g(0) == doctest::Approx(2.0 * std::sin(y)));
  CHECK(g(1) == doctest::Approx(-2.0 * std::cos(y)));

  const auto line = cost.linear_level_set(y, 0.5);
  REQUIRE(line.has_value());
  // Points on the line have dy_c = k.
  const Eigen::Vector2d t(-line->normal(1), line->normal(0));
  const Eigen::VectorXd on_line = line->offset * line->normal + 0.2 * t;
  CHECK(cost.dy_c(on_line, y) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("arc power derivatives against finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (const double p : {3.0, 4.0, 8.0}) {
    const ArcPowerCost cost(p);
    for (int s = 0; s < 20; ++s) {
      const double r = unit(rng);
      const double th = 0.5 * kPi * unit(rng);
      Eigen::VectorXd x(2);
      x << r * std::cos(th), r * std::sin(th);
      const double y = 0.5 * kPi * unit(rng);
      const double exact = cost.dy_c(x, y);
      const double coarse = fd_y(cost, x, y, 1e-4);
      const double fine = fd_y(cost, x, y, 1e-6);
      CHECK(std::abs(exact - coarse) <= 1e-6 * std::max(1.0, std::abs(exact)));
      CHECK(std::abs(exact - fine) <= 1e-7 * std::max(1.0, std::abs(exact)));
    }
  }
  CHECK_THROWS_AS(ArcPowerCost(2.0), DomainError);
  CHECK_THROWS_AS(ArcPowerCost(1.0), DomainError);
}

TEST_CASE("check_derivatives on shipped costs") {
  const ArcQuadraticCost quad;
  CHECK(check_derivatives(quad, 100, 1).worst() <= 1e-5);
  const ArcPowerCost p4(4.0);
  CHECK(check_derivatives(p4, 100, 1).worst() <= 1e-5);
  const ArcPowerCost p8(8.0);
  CHECK(check_derivatives(p8, 100, 2).worst() <= 1e-5);
  const ZeroCost zero;
  const DerivativeReport r = check_derivatives(zero, 100, 1);
  CHECK(r.dy_c == 0.0);
  CHECK(r.dyy_c == 0.0);
  CHECK(r.grad_x_dy_c == 0.0);
  CHECK_THROWS_AS(check_derivatives(quad, 0, 1), DomainError);
}

TEST_CASE("dy_c_range") {
  const ArcQuadraticCost quad;
  const PointCloudMeasure mu = testing::quarter_disk(2500);
  const SlopeRange r = dy_c_range(quad, mu, kPi / 6.0);
  CHECK(r.k_lo < 0.0);
  CHECK(r.k_hi > 0.0);
  CHECK(r.k_lo >= -2.0);
  CHECK(r.k_hi <= 2.0);

  const ZeroCost zero;
  const SlopeRange z = dy_c_range(zero, mu, 0.3);
  CHECK(z.k_lo == 0.0);
  CHECK(z.k_hi == 0.0);

  const SlopeRange one = dy_c_range(quad, testing::single_point(1.0, 0.0), kPi / 2.0);
  CHECK(one.k_lo == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(one.k_hi == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("cost and slope matrices") {
  const ArcQuadraticCost quad;
  const PointCloudMeasure mu = testing::quarter_disk(100);
  const Grid1D grid(0.0, kPi / 6.0, 7);
  const Matrix c = cost_matrix(quad, mu, grid);
  const Matrix s = dy_c_matrix(quad, mu, grid);
  REQUIRE(c.rows() == 100);
  REQUIRE(c.cols() == 7);
  CHECK(c(13, 4) == quad.c(mu.point(13), grid.midpoint(4)));
  CHECK(s(57, 2) == quad.dy_c(mu.point(57), grid.midpoint(2)));
}

TEST_CASE("make_cost") {
  CHECK(make_cost("arc_quadratic")->name() == "arc_quadratic");
  const auto p = make_cost("arc_power", 4.0);
  CHECK(p->name() == "arc_power");
  CHECK(dynamic_cast<const ArcPowerCost&>(*p).p() == 4.0);
  CHECK_THROWS_AS(make_cost("arc_power"), DomainError);
  CHECK_THROWS_AS(make_cost("nope"), DomainError);
}
