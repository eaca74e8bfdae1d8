#include "cournot/best_reply.hpp"

#include <cmath>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

constexpr int kConvexitySamples = 9;

}  // namespace

Interaction Interaction::none() {
  return {[](double, double) { return 0.0; }, [](double, double) { return 0.0; },
          [](double, double) { return 0.0; }};
}

Interaction Interaction::quadratic(double strength) {
  return {[=](double y, double z) { return strength * (y - z) * (y - z); },
          [=](double y, double z) { return 2.0 * strength * (y - z); }, [=](double, double) { return 2.0 * strength; }};
}

InteractionField::InteractionField(const InteractionSpec& spec, const GridMeasure1D& nu)
    : spec_(&spec), grid_(nu.grid()), nodes_(nu.grid().midpoints()), masses_(nu.masses()) {}

double InteractionField::value(double y) const {
  double total = spec_->potential.value(y);
  for (Index l = 0; l < nodes_.size(); ++l)
    if (masses_(l) != 0.0) total += spec_->interaction.value(y, nodes_(l)) * masses_(l);
  return total;
}

double InteractionField::derivative(double y) const {
  double total = spec_->potential.derivative(y);
  for (Index l = 0; l < nodes_.size(); ++l)
    if (masses_(l) != 0.0) total += spec_->interaction.dy(y, nodes_(l)) * masses_(l);
  return total;
}

double InteractionField::second(double y) const {
  double total = spec_->potential.second(y);
  for (Index l = 0; l < nodes_.size(); ++l)
    if (masses_(l) != 0.0) total += spec_->interaction.dyy(y, nodes_(l)) * masses_(l);
  return total;
}

double agent_cost(const CostModel& cost, const InteractionField& field, PointRef x, double y) {
  return cost.c(x, y) + field.value(y);
}

BestReply best_reply_point(const CostModel& cost, const InteractionField& field, PointRef x) {
  const Grid1D& grid = field.grid();
  const double lo_end = grid.y_min;
  const double hi_end = grid.y_max;

  bool convex = true;
  for (int s = 0; s < kConvexitySamples && convex; ++s) {
    const double y = lo_end + (hi_end - lo_end) * s / (kConvexitySamples - 1);
    convex = cost.dyy_c(x, y) + field.second(y) > 0.0;
  }
  if (!convex) {
    // Golden-section search on the objective itself.
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo_end;
    double b = hi_end;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = agent_cost(cost, field, x, c);
    double fd = agent_cost(cost, field, x, d);
    while (b - a > 1e-12) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - ratio * (b - a);
        fc = agent_cost(cost, field, x, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + ratio * (b - a);
        fd = agent_cost(cost, field, x, d);
      }
    }
    BestReply reply{0.5 * (a + b), false, true};
    for (const double end : {lo_end, hi_end}) {
      if (agent_cost(cost, field, x, end) < agent_cost(cost, field, x, reply.y)) reply = {end, true, true};
    }
    return reply;
  }

  auto slope = [&](double y) { return cost.dy_c(x, y) + field.derivative(y); };
  if (slope(lo_end) >= 0.0) return {lo_end, true, false};
  if (slope(hi_end) <= 0.0) return {hi_end, true, false};

  double lo = lo_end;
  double hi = hi_end;
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = slope(y);
    if (std::abs(g) <= 1e-10) break;
    if (g < 0.0) lo = y;
    else hi = y;
    if (hi - lo <= 1e-12) {
      y = 0.5 * (lo + hi);
      break;
    }
    const double h = cost.dyy_c(x, y) + field.second(y);
    const double newton = y - g / h;
    y = (h > 0.0 && newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
  }
  return {y, false, false};
}

BestReply best_reply_point(const CostModel& cost, const InteractionSpec& spec, const GridMeasure1D& nu, PointRef x) {
  return best_reply_point(cost, InteractionField(spec, nu), x);
}

GridMeasure1D push_forward(const Vector& replies, const PointCloudMeasure& mu, const Grid1D& grid) {
  if (replies.size() != mu.size()) throw ShapeError("push_forward: one reply per point required");
  const double dy = grid.dy();
  const double slack = 1e-12 * (std::abs(grid.y_min) + std::abs(grid.y_max) + 1.0);
  const Index n = grid.n_cells;
  Vector mass = Vector::Zero(n);
  for (Index i = 0; i < mu.size(); ++i) {
    const double b = replies(i);
    if (!(b >= grid.y_min - slack && b <= grid.y_max + slack))
      throw DomainError("push_forward: reply outside [y_min, y_max]");
    const double s = (b - grid.y_min) / dy - 0.5;
    const double cell = std::floor(s);
    const double frac = s - cell;
    const auto j = static_cast<Index>(cell);
    const double w = mu.weight(i);
    if (j < 0) {
      mass(0) += w;
    } else if (j >= n - 1) {
      mass(n - 1) += w;
    } else {
      mass(j) += w * (1.0 - frac);
      mass(j + 1) += w * frac;
    }
  }
  return normalize(mass, grid);
}

EquilibriumResult solve_bestreply(const CostModel& cost, const PointCloudMeasure& mu, const InteractionSpec& spec,
                                  const GridMeasure1D& nu0, const SolverConfig& config) {
  config.validate();
  const Grid1D& grid = nu0.grid();
  auto replies_under = [&](const GridMeasure1D& nu, EquilibriumResult* diagnostics) {
    const InteractionField field(spec, nu);
    Vector replies(mu.size());
    for (Index i = 0; i < mu.size(); ++i) {
      const BestReply r = best_reply_point(cost, field, mu.point(i));
      replies(i) = r.y;
      if (diagnostics != nullptr) {
        diagnostics->boundary_clamped += r.clamped ? 1 : 0;
        diagnostics->convexity_fallbacks += r.convexity_fallback ? 1 : 0;
      }
    }
    return replies;
  };

  EquilibriumResult result{.nu = nu0, .profile = make_profile(grid, Vector::Zero(grid.n_cells))};
  GridMeasure1D nu = nu0;
  for (int it = 1; it <= config.max_iters; ++it) {
    GridMeasure1D next = push_forward(replies_under(nu, nullptr), mu, grid);
    if (config.damping < 1.0)
      next = normalize(config.damping * next.density() + (1.0 - config.damping) * nu.density(), grid);
    const double delta = l1_distance(next, nu);
    result.history.push_back(delta);
    result.residual_history.push_back(delta);
    nu = std::move(next);
    result.iterations = it;
    if (delta <= config.tol_l1) {
      result.converged = true;
      break;
    }
  }

  const Vector replies = replies_under(nu, &result);
  result.map.assigned_y = replies;
  result.map.assigned_cell.resize(replies.size());
  for (Index i = 0; i < replies.size(); ++i) result.map.assigned_cell(i) = static_cast<int>(grid.cell_of(replies(i)));
  result.map.boundary_assignments = result.boundary_clamped;
  result.residual = l1_distance(push_forward(replies, mu, grid), nu);
  result.profile = level_profile(cost, mu, nu, config.k_tol);
  result.nu = std::move(nu);
  return result;
}

}  // namespace cournot
