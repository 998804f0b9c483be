#pragma once

#include <Eigen/Dense>

namespace cier::ticc {

struct AdmmOptions {
  int max_iters = 1000;
  double tol = 1e-6;
  double rho = 1.0;
  /// Added to the diagonal (doubling each retry) until the result factors.
  double ridge = 1e-6;
};

struct GlassoResult {
  Eigen::MatrixXd precision;
  int iterations = 0;
  bool converged = false;
  /// Total ridge added to reach positive definiteness (0 when none was needed).
  double ridge_added = 0.0;
};

/// Sparse inverse covariance restricted to symmetric block-Toeplitz matrices
/// with `block` x `block` blocks:
///
///   minimize  -logdet(P) + tr(S P) + lambda * sum_ij |P_ij|
///
/// solved by ADMM. The Z-step averages every group of entries the Toeplitz
/// constraint ties together and soft-thresholds the average, which is the
/// exact proximal operator of the constrained L1 term.
GlassoResult solve_toeplitz_glasso(const Eigen::MatrixXd& empirical_cov, Eigen::Index block, double lambda,
                                   const AdmmOptions& options = {});

/// Orthogonal projection onto symmetric block-Toeplitz matrices.
Eigen::MatrixXd project_block_toeplitz(const Eigen::MatrixXd& m, Eigen::Index block);

/// Largest absolute difference between entries that the block-Toeplitz
/// constraint requires to be equal (including the symmetry pairs).
double toeplitz_deviation(const Eigen::MatrixXd& m, Eigen::Index block);

/// True when an LLT factorization succeeds.
bool is_positive_definite(const Eigen::MatrixXd& m);

}  // namespace cier::ticc
