#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "cournot/measures.hpp"

namespace testing {

using cournot::Index;
using cournot::Matrix;
using cournot::Vector;

inline constexpr double kPi = std::numbers::pi;

inline cournot::PointCloudMeasure quarter_disk(Index n = 10000) {
  cournot::QuarterDiskSampler sampler;
  sampler.n_points = n;
  return sampler.sample();
}

inline double polar_angle(const Eigen::Ref<const Eigen::VectorXd>& x) { return std::atan2(x(1), x(0)); }

inline cournot::PointCloudMeasure single_point(double x1, double x2) {
  Matrix p(2, 1);
  p << x1, x2;
  return {p, Vector::Ones(1)};
}

/// Random probability vector with entries bounded away from zero.
inline Vector random_simplex(Index n, std::mt19937_64& rng, double floor = 0.05) {
  std::uniform_real_distribution<double> unit(floor, 1.0);
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = unit(rng);
  return w / w.sum();
}

/// Random equal-weight cloud in the open quarter disk.
inline cournot::PointCloudMeasure random_cloud(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix p(2, n);
  for (Index i = 0; i < n; ++i) {
    const double r = std::sqrt(unit(rng)) * 0.999 + 1e-3;
    const double t = 0.5 * kPi * (0.001 + 0.998 * unit(rng));
    p(0, i) = r * std::cos(t);
    p(1, i) = r * std::sin(t);
  }
  return {p, random_simplex(n, rng)};
}

/// Composite Simpson rule with n (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace testing
