#include "cournot/lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "cournot/errors.hpp"

namespace cournot {

namespace {

constexpr Index kMaxEntries = 250000;
constexpr int kDegenerateRunBeforeBland = 50;

struct Cell {
  Index i;
  Index j;
};

// Spanning tree over M row nodes and N column nodes (column j is node M + j).
class BasisTree {
 public:
  BasisTree(Index m, Index n) : m_(m), n_(n) {}

  void potentials(const std::vector<Cell>& basis, const Matrix& cost, Vector& u, Vector& v) const {
    const auto adj = adjacency(basis);
    std::vector<bool> seen(static_cast<std::size_t>(m_ + n_), false);
    std::deque<Index> queue{0};
    seen[0] = true;
    u(0) = 0.0;
    while (!queue.empty()) {
      const Index node = queue.front();
      queue.pop_front();
      for (const std::size_t e : adj[static_cast<std::size_t>(node)]) {
        const Cell& cell = basis[e];
        if (node < m_) {
          const Index other = m_ + cell.j;
          if (seen[static_cast<std::size_t>(other)]) continue;
          v(cell.j) = cost(cell.i, cell.j) - u(cell.i);
          seen[static_cast<std::size_t>(other)] = true;
          queue.push_back(other);
        } else {
          if (seen[static_cast<std::size_t>(cell.i)]) continue;
          u(cell.i) = cost(cell.i, cell.j) - v(cell.j);
          seen[static_cast<std::size_t>(cell.i)] = true;
          queue.push_back(cell.i);
        }
      }
    }
  }

  // Basis edges on the tree path from row node `row` to column node `col`,
  // listed starting from the column end.
  std::vector<std::size_t> path(const std::vector<Cell>& basis, Index row, Index col) const {
    const auto adj = adjacency(basis);
    const auto total = static_cast<std::size_t>(m_ + n_);
    std::vector<std::size_t> via(total, std::numeric_limits<std::size_t>::max());
    std::vector<bool> seen(total, false);
    std::deque<Index> queue{row};
    seen[static_cast<std::size_t>(row)] = true;
    const Index target = m_ + col;
    while (!queue.empty() && !seen[static_cast<std::size_t>(target)]) {
      const Index node = queue.front();
      queue.pop_front();
      for (const std::size_t e : adj[static_cast<std::size_t>(node)]) {
        const Index other = node < m_ ? m_ + basis[e].j : basis[e].i;
        if (seen[static_cast<std::size_t>(other)]) continue;
        seen[static_cast<std::size_t>(other)] = true;
        via[static_cast<std::size_t>(other)] = e;
        queue.push_back(other);
      }
    }
    std::vector<std::size_t> edges;
    for (Index node = target; node != row;) {
      const std::size_t e = via[static_cast<std::size_t>(node)];
      edges.push_back(e);
      node = node < m_ ? m_ + basis[e].j : basis[e].i;
    }
    return edges;
  }

 private:
  std::vector<std::vector<std::size_t>> adjacency(const std::vector<Cell>& basis) const {
    std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(m_ + n_));
    for (std::size_t e = 0; e < basis.size(); ++e) {
      adj[static_cast<std::size_t>(basis[e].i)].push_back(e);
      adj[static_cast<std::size_t>(m_ + basis[e].j)].push_back(e);
    }
    return adj;
  }

  Index m_;
  Index n_;
};

// Flows on a spanning-tree basis are determined by the marginals; peel leaves.
Vector tree_flows(const std::vector<Cell>& basis, const Vector& a, const Vector& b) {
  const Index m = a.size();
  const Index n = b.size();
  const auto total = static_cast<std::size_t>(m + n);
  std::vector<std::vector<std::size_t>> adj(total);
  for (std::size_t e = 0; e < basis.size(); ++e) {
    adj[static_cast<std::size_t>(basis[e].i)].push_back(e);
    adj[static_cast<std::size_t>(m + basis[e].j)].push_back(e);
  }
  std::vector<double> remaining(total);
  for (Index i = 0; i < m; ++i) remaining[static_cast<std::size_t>(i)] = a(i);
  for (Index j = 0; j < n; ++j) remaining[static_cast<std::size_t>(m + j)] = b(j);
  std::vector<std::size_t> degree(total);
  for (std::size_t k = 0; k < total; ++k) degree[k] = adj[k].size();
  std::vector<bool> used(basis.size(), false);
  Vector flow = Vector::Zero(static_cast<Index>(basis.size()));

  std::deque<std::size_t> leaves;
  for (std::size_t k = 0; k < total; ++k)
    if (degree[k] == 1) leaves.push_back(k);
  while (!leaves.empty()) {
    const std::size_t node = leaves.front();
    leaves.pop_front();
    if (degree[node] != 1) continue;
    std::size_t edge = 0;
    for (const std::size_t e : adj[node])
      if (!used[e]) edge = e;
    used[edge] = true;
    const double amount = std::max(0.0, remaining[node]);
    flow(static_cast<Index>(edge)) = amount;
    const auto row = static_cast<std::size_t>(basis[edge].i);
    const auto col = static_cast<std::size_t>(m + basis[edge].j);
    const std::size_t other = node == row ? col : row;
    remaining[node] -= amount;
    remaining[other] -= amount;
    degree[node] = 0;
    if (--degree[other] == 1) leaves.push_back(other);
  }
  return flow;
}

}  // namespace

ExactOtResult solve_exact_ot(const Matrix& cost, const Vector& mu_weights, const Vector& nu_weights) {
  const Index m = cost.rows();
  const Index n = cost.cols();
  if (m == 0 || n == 0) throw ShapeError("solve_exact_ot: empty cost matrix");
  if (mu_weights.size() != m || nu_weights.size() != n) throw ShapeError("solve_exact_ot: weights do not match cost");
  if (m * n > kMaxEntries) throw DomainError("solve_exact_ot: instance exceeds M * N <= 250000");
  if (!cost.allFinite()) throw DomainError("solve_exact_ot: cost must be finite");
  if ((mu_weights.array() < 0.0).any() || (nu_weights.array() < 0.0).any())
    throw DomainError("solve_exact_ot: weights must be nonnegative");
  if (std::abs(mu_weights.sum() - 1.0) > 1e-12 || std::abs(nu_weights.sum() - 1.0) > 1e-12)
    throw DomainError("solve_exact_ot: marginals must each sum to 1");

  // North-west corner; exactly one index advances per step, so the basis is
  // a spanning tree with m + n - 1 cells even when it is degenerate.
  std::vector<Cell> basis;
  basis.reserve(static_cast<std::size_t>(m + n - 1));
  {
    Vector a = mu_weights;
    Vector b = nu_weights;
    Index i = 0;
    Index j = 0;
    while (true) {
      basis.push_back({i, j});
      const double amount = std::min(a(i), b(j));
      a(i) -= amount;
      b(j) -= amount;
      if (i == m - 1 && j == n - 1) break;
      if (j == n - 1 || (i < m - 1 && a(i) <= b(j))) ++i;
      else ++j;
    }
  }
  Vector flow = tree_flows(basis, mu_weights, nu_weights);

  const BasisTree tree(m, n);
  const double tol = 1e-12 * (1.0 + cost.cwiseAbs().maxCoeff());
  Vector u(m);
  Vector v(n);
  Index pivots = 0;
  int degenerate_run = 0;
  const Index max_pivots = 50 * (m + n) * (m + n) + 1000;

  while (true) {
    tree.potentials(basis, cost, u, v);
    Index enter_i = -1;
    Index enter_j = -1;
    double best = -tol;
    const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
    for (Index i = 0; i < m && !(bland && enter_i >= 0); ++i) {
      for (Index j = 0; j < n; ++j) {
        const double reduced = cost(i, j) - u(i) - v(j);
        if (reduced < best) {
          enter_i = i;
          enter_j = j;
          if (bland) break;
          best = reduced;
        }
      }
    }
    if (enter_i < 0) break;
    if (++pivots > max_pivots) throw ConvergenceError("solve_exact_ot: pivot limit reached");

    const std::vector<std::size_t> cycle = tree.path(basis, enter_i, enter_j);
    // Edges at even offsets from the column end lose flow.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = cycle.front();
    for (std::size_t k = 0; k < cycle.size(); k += 2) {
      const std::size_t e = cycle[k];
      const double f = flow(static_cast<Index>(e));
      const Index key = basis[e].i * n + basis[e].j;
      const Index leaving_key = basis[leaving].i * n + basis[leaving].j;
      if (f < theta || (f == theta && key < leaving_key)) {
        theta = f;
        leaving = e;
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k)
      flow(static_cast<Index>(cycle[k])) += k % 2 == 0 ? -theta : theta;
    degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    basis[leaving] = {enter_i, enter_j};
    flow(static_cast<Index>(leaving)) = theta;
  }

  flow = tree_flows(basis, mu_weights, nu_weights);
  ExactOtResult result;
  result.coupling = Matrix::Zero(m, n);
  for (std::size_t e = 0; e < basis.size(); ++e)
    result.coupling(basis[e].i, basis[e].j) += flow(static_cast<Index>(e));
  result.cost = result.coupling.cwiseProduct(cost).sum();
  result.u = u;
  result.v = v;
  result.pivots = pivots;
  return result;
}

bool CertificateReport::ok(double tol) const {
  return max_marginal_error <= 1e-12 && min_entry >= 0.0 && max_dual_violation <= tol && max_slackness <= tol &&
         duality_gap <= tol * (1.0 + std::abs(primal_cost));
}

CertificateReport verify_certificate(const Matrix& cost, const Vector& mu_weights, const Vector& nu_weights,
                                     const Matrix& coupling, const Vector& u, const Vector& v) {
  if (coupling.rows() != cost.rows() || coupling.cols() != cost.cols() || u.size() != cost.rows() ||
      v.size() != cost.cols())
    throw ShapeError("verify_certificate: shapes do not match");
  CertificateReport report;
  report.max_marginal_error = std::max((coupling.rowwise().sum() - mu_weights).cwiseAbs().maxCoeff(),
                                       (coupling.colwise().sum().transpose() - nu_weights).cwiseAbs().maxCoeff());
  report.min_entry = coupling.minCoeff();
  for (Index j = 0; j < cost.cols(); ++j) {
    for (Index i = 0; i < cost.rows(); ++i) {
      const double slack = u(i) + v(j) - cost(i, j);
      report.max_dual_violation = std::max(report.max_dual_violation, slack);
      if (coupling(i, j) > 0.0) report.max_slackness = std::max(report.max_slackness, std::abs(slack));
    }
  }
  const double primal = coupling.cwiseProduct(cost).sum();
  report.primal_cost = primal;
  report.duality_gap = std::abs(primal - (mu_weights.dot(u) + nu_weights.dot(v)));
  return report;
}

CertificateReport verify_certificate(const Matrix& cost, const Vector& mu_weights, const Vector& nu_weights,
                                     const ExactOtResult& result) {
  return verify_certificate(cost, mu_weights, nu_weights, result.coupling, result.u, result.v);
}

}  // namespace cournot
