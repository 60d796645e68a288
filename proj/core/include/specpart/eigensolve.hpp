#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "specpart/neighborhood.hpp"
#include "specpart/sparse.hpp"

namespace specpart {

enum class EigBackend {
  kAuto,       ///< direct below `direct_limit`, iterative above
  kDirect,     ///< sparse Cholesky (CHOLMOD when available)
  kIterative,  ///< preconditioned conjugate gradients per inverse-iteration step
};

struct EigOptions {
  /// Relative residual ||Au - lambda Bu|| / (|lambda| ||Bu||) at convergence.
  double tol = 1e-8;
  /// Outer iterations; 0 selects max(30, 10 sqrt(order)).
  int max_iter = 0;
  EigBackend backend = EigBackend::kAuto;
  /// Guard vectors carried beyond the requested modes.
  int guard = 4;
  Index direct_limit = 250000;
  /// Relative tolerance of the inner CG solves (iterative backend).
  double inner_tol = 1e-11;
};

struct EigResult {
  double eigenvalue = 0.0;
  /// Grid problems: sum u_i^2 == 1; generalized problems: u^T B u == 1.
  /// Largest-magnitude entry is positive.
  Eigen::VectorXd vector;
  /// ||Au - lambda Bu|| / ||u||.
  double residual = 0.0;
  int iterations = 0;
  /// Order of the matrix actually solved.
  Index order = 0;
};

/// The k lowest eigenpairs, ascending; columns B-orthonormal.
struct EigSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double max_residual = 0.0;
  int iterations = 0;
};

class EigenSolveError : public std::runtime_error {
 public:
  EigenSolveError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// Smallest eigenpair of a symmetric positive definite matrix.
EigResult smallest_eigpair(const SparseOperator& a, const EigOptions& options = {},
                           const Eigen::VectorXd& initial = {});

/// Smallest eigenpair of A u = lambda M u with M symmetric positive definite
/// and A positive semidefinite.
EigResult smallest_eigpair_generalized(const SparseOperator& a, const SparseOperator& m,
                                       const EigOptions& options = {}, const Eigen::VectorXd& initial = {});

/// The k smallest eigenpairs of A u = lambda M u (M == nullptr: identity).
EigSpectrum smallest_eigpairs(const SparseOperator& a, const SparseOperator* m, int k,
                              const EigOptions& options = {}, const Eigen::VectorXd& initial = {});

struct PenaltyOptions {
  /// Quadrature weight of a node (h^dim) for grid problems without a mass matrix.
  double node_weight = 1.0;
  /// Nodes with mask 0 are always penalized (phi treated as 0). Empty: no mask.
  std::span<const std::uint8_t> mask;
  EigOptions eig;
};

/// First eigenpair of the penalized operator restricted to a neighborhood.
///
/// Without `mass`: (L_R + C diag(1 - phi_R)) u = lambda u, u scaled so that
/// node_weight * sum u^2 == 1. With `mass`:
/// (K_R + C diag((1 - phi_R) m_R)) u = lambda M_R u with m the lumped (row-sum)
/// mass of the full matrix; u^T M_R u == 1. The returned
/// vector is zero-extended to the full node set.
EigResult penalized_eigenvalue(const SparseOperator& base, const SparseOperator* mass,
                               const Eigen::Ref<const Eigen::VectorXd>& phi, double penalty,
                               const Neighborhood& neighborhood, const PenaltyOptions& options = {});

}  // namespace specpart
