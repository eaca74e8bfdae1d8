#include "cournot/monge_ampere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

constexpr double kSingularGradient = 1e-8;

// Chord {normal . x = offset} clipped to the closed unit quarter disk.
Polyline clipped_chord(const LinearLevelSet& line, int resolution) {
  const Eigen::Vector2d n = line.normal;
  const Eigen::Vector2d tangent(-n.y(), n.x());
  const double b = line.offset;
  if (std::abs(b) > 1.0) return {};
  const double half = std::sqrt(std::max(0.0, 1.0 - b * b));
  double t_lo = -half;
  double t_hi = half;
  // b n + t tangent >= 0 componentwise
  for (int d = 0; d < 2; ++d) {
    const double a = b * n(d);
    const double s = tangent(d);
    if (s > 0.0) t_lo = std::max(t_lo, -a / s);
    else if (s < 0.0) t_hi = std::min(t_hi, -a / s);
    else if (a < 0.0) return {};
  }
  if (t_lo > t_hi) return {};
  Polyline out;
  out.reserve(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    const double t = t_lo + (t_hi - t_lo) * static_cast<double>(i) / static_cast<double>(resolution - 1);
    out.emplace_back(b * n + t * tangent);
  }
  return out;
}

// Splits a polyline into the parts inside the closed unit disk.
std::vector<Polyline> clip_to_disk(const Polyline& line) {
  std::vector<Polyline> pieces;
  Polyline current;
  auto inside = [](const Eigen::Vector2d& p) { return p.squaredNorm() <= 1.0; };
  auto crossing = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
    // |p + t (q - p)|^2 = 1 for t in [0, 1]
    const Eigen::Vector2d d = q - p;
    const double a = d.squaredNorm();
    const double b = 2.0 * p.dot(d);
    const double c = p.squaredNorm() - 1.0;
    const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
    double t = (-b + disc) / (2.0 * a);
    if (t < 0.0 || t > 1.0) t = (-b - disc) / (2.0 * a);
    return Eigen::Vector2d(p + std::clamp(t, 0.0, 1.0) * d);
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    const bool in = inside(line[i]);
    if (i > 0 && in != inside(line[i - 1])) current.push_back(crossing(line[i - 1], line[i]));
    if (in) {
      current.push_back(line[i]);
    } else if (!current.empty()) {
      if (current.size() > 1) pieces.push_back(std::move(current));
      current.clear();
    }
  }
  if (current.size() > 1) pieces.push_back(std::move(current));
  return pieces;
}

}  // namespace

double LevelCurve::length() const {
  double total = 0.0;
  for (const Polyline& piece : pieces)
    for (std::size_t i = 1; i < piece.size(); ++i) total += (piece[i] - piece[i - 1]).norm();
  return total;
}

LevelCurve marching_squares_level_curve(const CostModel& cost, double y, double k, int resolution) {
  if (resolution < 2) throw DomainError("level_curve: resolution must be >= 2");
  const int n = resolution;
  const double h = 1.0 / static_cast<double>(n);
  const int stride = n + 1;
  std::vector<double> f(static_cast<std::size_t>(stride * stride));
  Eigen::VectorXd x(2);
  for (int b = 0; b <= n; ++b) {
    for (int a = 0; a <= n; ++a) {
      x << a * h, b * h;
      f[static_cast<std::size_t>(b * stride + a)] = cost.dy_c(x, y) - k;
    }
  }
  auto value = [&](int a, int b) { return f[static_cast<std::size_t>(b * stride + a)]; };
  auto above = [&](int a, int b) { return value(a, b) >= 0.0; };

  // Edge ids: 2 * node + 0 for the edge to the right, 2 * node + 1 for the edge upwards.
  std::unordered_map<long long, Eigen::Vector2d> crossing_point;
  std::unordered_map<long long, std::vector<long long>> adjacency;
  auto edge_point = [&](long long id) {
    auto it = crossing_point.find(id);
    if (it != crossing_point.end()) return it->second;
    const long long node = id / 2;
    const int a = static_cast<int>(node % stride);
    const int b = static_cast<int>(node / stride);
    const int a2 = (id % 2 == 0) ? a + 1 : a;
    const int b2 = (id % 2 == 0) ? b : b + 1;
    const double fa = value(a, b);
    const double fb = value(a2, b2);
    const double t = fa == fb ? 0.5 : fa / (fa - fb);
    Eigen::Vector2d p((a + t * (a2 - a)) * h, (b + t * (b2 - b)) * h);
    crossing_point.emplace(id, p);
    return p;
  };
  auto link = [&](long long e1, long long e2) {
    edge_point(e1);
    edge_point(e2);
    adjacency[e1].push_back(e2);
    adjacency[e2].push_back(e1);
  };

  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const long long n00 = static_cast<long long>(b) * stride + a;
      const long long n01 = static_cast<long long>(b + 1) * stride + a;
      const long long n10 = n00 + 1;
      const long long e_bottom = 2 * n00;
      const long long e_top = 2 * n01;
      const long long e_left = 2 * n00 + 1;
      const long long e_right = 2 * n10 + 1;
      const bool s0 = above(a, b);
      const bool s1 = above(a + 1, b);
      const bool s2 = above(a + 1, b + 1);
      const bool s3 = above(a, b + 1);
      std::vector<long long> cut;
      if (s0 != s1) cut.push_back(e_bottom);
      if (s1 != s2) cut.push_back(e_right);
      if (s3 != s2) cut.push_back(e_top);
      if (s0 != s3) cut.push_back(e_left);
      if (cut.size() == 2) {
        link(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const double center = 0.25 * (value(a, b) + value(a + 1, b) + value(a + 1, b + 1) + value(a, b + 1));
        if ((center >= 0.0) == s0) {
          link(e_bottom, e_right);
          link(e_top, e_left);
        } else {
          link(e_left, e_bottom);
          link(e_right, e_top);
        }
      }
    }
  }

  // Chain edges into polylines: open chains from degree-1 ends first, then cycles.
  std::unordered_map<long long, bool> visited;
  std::vector<long long> order;
  order.reserve(adjacency.size());
  for (const auto& [id, nbrs] : adjacency) order.push_back(id);
  std::sort(order.begin(), order.end());
  LevelCurve curve;
  auto walk = [&](long long start) {
    Polyline line;
    long long prev = -1;
    long long cur = start;
    while (true) {
      visited[cur] = true;
      line.push_back(crossing_point.at(cur));
      long long next = -1;
      for (const long long cand : adjacency.at(cur)) {
        if (cand != prev && !visited[cand]) {
          next = cand;
          break;
        }
      }
      if (next < 0) {
        for (const long long cand : adjacency.at(cur))
          if (cand == start && cand != prev && line.size() > 2) line.push_back(crossing_point.at(start));
        break;
      }
      prev = cur;
      cur = next;
    }
    for (Polyline& piece : clip_to_disk(line)) curve.pieces.push_back(std::move(piece));
  };
  for (const long long id : order)
    if (!visited[id] && adjacency.at(id).size() == 1) walk(id);
  for (const long long id : order)
    if (!visited[id]) walk(id);
  return curve;
}

LevelCurve level_curve(const CostModel& cost, double y, double k, int resolution) {
  if (resolution < 2) throw DomainError("level_curve: resolution must be >= 2");
  if (const auto line = cost.linear_level_set(y, k)) {
    LevelCurve curve;
    Polyline chord = clipped_chord(*line, resolution);
    if (!chord.empty()) curve.pieces.push_back(std::move(chord));
    return curve;
  }
  return marching_squares_level_curve(cost, y, k, resolution);
}

MaDensity ma_density(const CostModel& cost, const DensityFn& density, const LevelCurve& curve, double y,
                     double kprime) {
  MaDensity out{0.0, std::numeric_limits<double>::infinity()};
  Eigen::VectorXd x(2);
  for (const Polyline& piece : curve.pieces) {
    std::vector<double> integrand(piece.size());
    for (std::size_t i = 0; i < piece.size(); ++i) {
      x = piece[i];
      const double grad = cost.grad_x_dy_c(x, y).norm();
      out.min_grad_norm = std::min(out.min_grad_norm, grad);
      if (grad < kSingularGradient) {
        std::ostringstream msg;
        msg << "ma_density: |grad_x dy_c| = " << grad << " at x = (" << x(0) << ", " << x(1) << "), y = " << y;
        throw SingularityError(msg.str());
      }
      integrand[i] = (cost.dyy_c(x, y) - kprime) / grad * density(piece[i]);
    }
    for (std::size_t i = 1; i < piece.size(); ++i)
      out.value += 0.5 * (integrand[i - 1] + integrand[i]) * (piece[i] - piece[i - 1]).norm();
  }
  return out;
}

MaDensity ma_density(const CostModel& cost, const DensityFn& density, double y, double k, double kprime,
                     int resolution) {
  return ma_density(cost, density, level_curve(cost, y, k, resolution), y, kprime);
}

MaResidual ma_residual(const CostModel& cost, const DensityFn& density, const GridMeasure1D& nu,
                       const LevelProfile& profile, int resolution) {
  if (!(nu.grid() == profile.grid)) throw ShapeError("ma_residual: profile and nu grids differ");
  const Index n = nu.size();
  const double dy = nu.grid().dy();
  MaResidual out;
  out.low_resolution = n < 3;
  out.min_grad_norm = std::numeric_limits<double>::infinity();
  double num = 0.0;
  double den = 0.0;
  for (Index j = 0; j < n; ++j) {
    double kprime = 0.0;
    if (n > 1) {
      if (j == 0) kprime = (profile.k(1) - profile.k(0)) / dy;
      else if (j == n - 1) kprime = (profile.k(n - 1) - profile.k(n - 2)) / dy;
      else kprime = (profile.k(j + 1) - profile.k(j - 1)) / (2.0 * dy);
    }
    const double y = nu.grid().midpoint(j);
    const MaDensity g = ma_density(cost, density, y, profile.k(j), kprime, resolution);
    out.min_grad_norm = std::min(out.min_grad_norm, g.min_grad_norm);
    num += std::abs(g.value - nu.density(j));
    den += std::abs(nu.density(j));
  }
  out.relative_l1 = num / den;
  return out;
}

double max_chord_deviation(const Polyline& line) {
  if (line.size() < 3) return 0.0;
  const Eigen::Vector2d a = line.front();
  const Eigen::Vector2d d = line.back() - a;
  const double len = d.norm();
  double worst = 0.0;
  for (const Eigen::Vector2d& p : line) {
    const Eigen::Vector2d r = p - a;
    const double dist = len > 0.0 ? std::abs(d.x() * r.y() - d.y() * r.x()) / len : r.norm();
    worst = std::max(worst, dist);
  }
  return worst;
}

}  // namespace cournot
