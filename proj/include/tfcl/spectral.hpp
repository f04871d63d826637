#pragma once

#include <Eigen/Dense>

#include "tfcl/bipartite.hpp"

namespace tfcl {

/// Full symmetric eigendecomposition, eigenvalues ascending.
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns are eigenvectors, orthonormal
};

EigenSystem sym_eig(const Eigen::MatrixXd& A);

/// Sum of the k smallest eigenvalues of A.
double truncated_eig_sum(const Eigen::MatrixXd& A, int k);

/// Closed-form minimizer of <L, U> over the spectahedron slice
/// {0 <= U <= I, tr U = k}, stable under eigenvalue multiplicity.
///
/// p is the last strict gap below k, q the first strict gap at or above k
/// (sentinels lambda_0 = 0, lambda_{N+1} = +inf); the weight vector c is
/// 1 up to p, (k-p)/(q-p) on the tied band, 0 beyond, and
/// U = V diag(c) V^T.
struct SpectralSolution {
  Eigen::MatrixXd U;
  Eigen::VectorXd c;
  int p = 0;
  int q = 0;
  double breve_delta = 0;  // min gap at p and q; +inf when q = N
  EigenSystem eig;
};

/// Eigenvalues closer than gap_tol * (1 + |lambda_k|) count as tied.
/// Requires a nonzero matrix and 1 <= k < N.
SpectralSolution u_update(const Eigen::MatrixXd& L, int k,
                          double gap_tol = 1e-8);

inline SpectralSolution u_update(const BipartiteLaplacian& L, int k,
                                 double gap_tol = 1e-8) {
  return u_update(L.matrix, k, gap_tol);
}

}  // namespace tfcl
