#include <doctest.h>

#include <cmath>

#include "cournot/cost_model.hpp"
#include "cournot/errors.hpp"
#include "cournot/monge_ampere.hpp"
#include "support.hpp"

using namespace cournot;
using testing::kPi;

namespace {

const DensityFn kUniform = [](const Eigen::Vector2d&) { return 4.0 / kPi; };

// Mixed derivative far below the singularity threshold everywhere.
class FlatCost final : public CostModel {
 public:
  std::string name() const override { return "flat"; }
  double c(PointRef x, double y) const override { return 1e-10 * (x(0) - x(1)) * y; }
  double dy_c(PointRef x, double) const override { return 1e-10 * (x(0) - x(1)); }
  double dyy_c(PointRef, double) const override { return 0.0; }
  Eigen::VectorXd grad_x_dy_c(PointRef, double) const override { return Eigen::Vector2d(1e-10, -1e-10); }
};

// Independent evaluation of G(y, k, k') for the quadratic cost: the level set
// is x = (k/2) n + s e with e = (cos y, sin y), n = (sin y, -cos y), on which
// dyy_c = 2s and |grad_x dy_c| = 2.
template <typename Rho>
double chord_oracle(double y, double k, double kprime, Rho&& rho) {
  const Eigen::Vector2d e(std::cos(y), std::sin(y));
  const Eigen::Vector2d n(std::sin(y), -std::cos(y));
  const double s_lo = std::max(-0.5 * k * std::tan(y), 0.5 * k / std::tan(y));
  const double s_hi = std::sqrt(1.0 - 0.25 * k * k);
  return testing::simpson(
      [&](double s) {
        const Eigen::Vector2d x = 0.5 * k * n + s * e;
        return (2.0 * s - kprime) / 2.0 * rho(x);
      },
      s_lo, s_hi, 4000);
}

}  // namespace

TEST_CASE("quadratic level curves are chords") {
  const ArcQuadraticCost quad;
  const LevelCurve ray = level_curve(quad, kPi / 4.0, 0.0, 50);
  REQUIRE(ray.pieces.size() == 1);
  const Polyline& line = ray.pieces[0];
  const Eigen::Vector2d a = line.front().norm() < line.back().norm() ? line.front() : line.back();
  const Eigen::Vector2d b = line.front().norm() < line.back().norm() ? line.back() : line.front();
  CHECK(a.norm() <= 1e-14);
  CHECK((b - Eigen::Vector2d(std::sqrt(0.5), std::sqrt(0.5))).norm() <= 1e-14);
  CHECK(max_chord_deviation(line) <= 1e-14);
  CHECK(ray.length() == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(level_curve(quad, kPi / 4.0, 2.0, 50).empty());
  // Near k_lo(y) = -2 cos y the chord shrinks to the corner (0, 1).
  const double y = 0.7;
  CHECK(level_curve(quad, y, -2.0 * std::cos(y) + 1e-6, 50).length() <= 1e-2);
  CHECK_THROWS_AS(level_curve(quad, y, 0.0, 1), DomainError);
}

TEST_CASE("marching squares reproduces the chord") {
  const ArcQuadraticCost quad;
  for (const double k : {-0.4, 0.0, 0.3}) {
    const LevelCurve curve = marching_squares_level_curve(quad, 0.6, k, 200);
    REQUIRE(curve.pieces.size() == 1);
    Eigen::VectorXd x(2);
    double worst = 0.0;
    for (const Eigen::Vector2d& p : curve.pieces[0]) {
      x = p;
      worst = std::max(worst, std::abs(quad.dy_c(x, 0.6) - k));
      CHECK(p.norm() <= 1.0 + 1e-12);
    }
    // dy_c is linear, so vertex interpolation on cell edges is exact.
    CHECK(worst <= 1e-12);
    CHECK(curve.length() == doctest::Approx(level_curve(quad, 0.6, k, 200).length()).epsilon(1e-3));
  }
}

TEST_CASE("arc power level curves bend") {
  for (const double p : {4.0, 8.0}) {
    const ArcPowerCost cost(p);
    const LevelCurve curve = level_curve(cost, 0.6, 0.1, 300);
    REQUIRE_FALSE(curve.empty());
    double deviation = 0.0;
    for (const Polyline& piece : curve.pieces) deviation = std::max(deviation, max_chord_deviation(piece));
    CHECK(deviation > 1e-3);
  }
}

TEST_CASE("ma_density on rays") {
  const ArcQuadraticCost quad;
  for (const double y : {0.1, 0.5, 1.0, 1.4}) {
    const MaDensity g = ma_density(quad, kUniform, y, 0.0, 0.0, 200);
    CHECK(g.value == doctest::Approx(2.0 / kPi).epsilon(1e-12));
    CHECK(g.min_grad_norm == doctest::Approx(2.0));
    // Affine in k' with slope -integral of mu / |grad| = -2/pi.
    for (const double kp : {-1.0, 0.5, 2.0})
      CHECK(ma_density(quad, kUniform, y, 0.0, kp, 200).value == doctest::Approx(2.0 / kPi - kp * 2.0 / kPi));
  }
  const MaDensity empty = ma_density(quad, kUniform, 0.5, 2.5, 0.0, 200);
  CHECK(empty.value == 0.0);
  CHECK(std::isinf(empty.min_grad_norm));
}

TEST_CASE("ma_density against the chord oracle") {
  const ArcQuadraticCost quad;
  auto rho = [](const Eigen::Vector2d& x) { return 1.0 + 3.0 * x(0) * x(0) * x(1); };
  const DensityFn handle = rho;
  for (const double y : {0.3, 0.8, 1.2})
    for (const double k : {-0.3, 0.1}) {
      const double oracle = chord_oracle(y, k, 0.4, rho);
      CHECK(ma_density(quad, handle, y, k, 0.4, 2000).value == doctest::Approx(oracle).epsilon(1e-5));
    }
}

TEST_CASE("ma_density rejects a vanishing mixed derivative") {
  const FlatCost flat;
  CHECK_THROWS_AS(ma_density(flat, kUniform, 0.5, 0.0, 0.0, 50), SingularityError);
}

TEST_CASE("ma_residual of the exact sector pair") {
  const ArcQuadraticCost quad;
  const Grid1D grid(0.0, kPi / 2.0, 200);
  const GridMeasure1D nu = GridMeasure1D::uniform(grid);
  const MaResidual r = ma_residual(quad, kUniform, nu, make_profile(grid, Vector::Zero(200)), 400);
  CHECK(r.relative_l1 <= 0.02);
  CHECK_FALSE(r.low_resolution);

  // Residual grows with a constant shift of k.
  double previous = r.relative_l1;
  for (const double shift : {0.025, 0.05, 0.1}) {
    const double next =
        ma_residual(quad, kUniform, nu, make_profile(grid, Vector::Constant(200, shift)), 400).relative_l1;
    CHECK(next > previous);
    previous = next;
  }

  const Grid1D two(0.0, kPi / 2.0, 2);
  const MaResidual coarse =
      ma_residual(quad, kUniform, GridMeasure1D::uniform(two), make_profile(two, Vector::Zero(2)), 400);
  CHECK(coarse.low_resolution);
  CHECK(std::isfinite(coarse.relative_l1));
  CHECK_THROWS_AS(ma_residual(quad, kUniform, GridMeasure1D::uniform(two), make_profile(grid, Vector::Zero(200)), 400),
                  ShapeError);
}

TEST_CASE("ma_residual converges on a curved profile") {
  // k(y) = 0.2 sin 3y and a non-uniform density; nu from the chord oracle
  // with the exact k'. Both the centered difference and the trapezoid rule
  // are second order, so doubling N and the resolution should at least halve
  // the residual.
  const ArcQuadraticCost quad;
  auto rho = [](const Eigen::Vector2d& x) { return 1.0 + 3.0 * x(0) * x(0) * x(1); };
  double previous = 0.0;
  for (const int n : {25, 50, 100}) {
    const Grid1D grid(0.2, 1.3, n);
    Vector k(n);
    Vector raw(n);
    for (Index j = 0; j < n; ++j) {
      const double y = grid.midpoint(j);
      k(j) = 0.2 * std::sin(3.0 * y);
      raw(j) = chord_oracle(y, k(j), 0.6 * std::cos(3.0 * y), rho);
    }
    const double z = raw.sum() * grid.dy();
    const DensityFn scaled = [&](const Eigen::Vector2d& x) { return rho(x) / z; };
    const MaResidual r =
        ma_residual(quad, scaled, GridMeasure1D(grid, raw / z), make_profile(grid, k), 2 * n);
    MESSAGE("N = " << n << " residual " << r.relative_l1);
    if (previous > 0.0) CHECK(r.relative_l1 <= 0.5 * previous);
    previous = r.relative_l1;
  }
}
