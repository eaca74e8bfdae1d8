#pragma once

#include "cournot/measures.hpp"

namespace cournot {

struct ExactOtResult {
  Matrix coupling;
  double cost = 0.0;
  Vector u;
  Vector v;
  Index pivots = 0;
};

/// Optimal coupling of the transportation LP min <C, gamma> over couplings
/// of (mu_weights, nu_weights), by the transportation simplex (north-west
/// corner start, Dantzig pricing with lowest-index ties, Bland's rule after a
/// run of degenerate pivots). The returned u, v satisfy u_i + v_j <= c_ij.
///
/// Weights must be nonnegative and each sum to 1 within 1e-12; instances with
/// M * N > 250000 are refused with DomainError.
ExactOtResult solve_exact_ot(const Matrix& cost, const Vector& mu_weights, const Vector& nu_weights);

struct CertificateReport {
  double max_marginal_error = 0.0;
  double min_entry = 0.0;
  /// max_ij (u_i + v_j - c_ij), clipped below at 0.
  double max_dual_violation = 0.0;
  /// max |u_i + v_j - c_ij| over entries with gamma_ij > 0.
  double max_slackness = 0.0;
  /// |<C, gamma> - (<mu, u> + <nu, v>)|.
  double duality_gap = 0.0;
  double primal_cost = 0.0;

  /// Marginals to 1e-12; violation, slackness <= tol; gap <= tol (1 + |cost|).
  bool ok(double tol = 1e-9) const;
};

/// Checks a claimed optimum against its dual pair, independent of how it was
/// produced.
CertificateReport verify_certificate(const Matrix& cost, const Vector& mu_weights, const Vector& nu_weights,
                                     const Matrix& coupling, const Vector& u, const Vector& v);
CertificateReport verify_certificate(const Matrix& cost, const Vector& mu_weights, const Vector& nu_weights,
                                     const ExactOtResult& result);

}  // namespace cournot
