#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tfcl {

/// d x T weight matrix: rows are features, columns are tasks.
using TaskMatrix = Eigen::MatrixXd;

/// Laplacian of the task-feature bipartite graph whose affinity carries
/// |W| on the off-diagonal blocks.
struct BipartiteLaplacian {
  Eigen::MatrixXd matrix;  // (d+T) x (d+T), symmetric PSD, zero row sums
  int d = 0;
  int T = 0;

  int size() const { return d + T; }
  bool is_zero(double tol = 0.0) const {
    return matrix.cwiseAbs().maxCoeff() <= tol;
  }
};

/// Partition of the d+T graph nodes into connected components.
struct Grouping {
  std::vector<int> labels;  // length d+T, component ids in [0, count)
  int count = 0;
};

/// L = diag(A*1) - A with A = [[0, |W|], [|W|^T, 0]].
/// Throws std::invalid_argument on non-finite entries.
BipartiteLaplacian build_laplacian(const TaskMatrix& W);

/// D_ij = U_ii + U_{d+j,d+j} - 2 U_{i,d+j}, clamped at 0.
/// Works directly on U entries so fractional eigenweights pass through.
Eigen::MatrixXd distance_matrix(const Eigen::MatrixXd& U, int d, int T);

/// Components of the graph with edges {(i, d+j): |W_ij| > threshold}.
/// Isolated nodes form singleton components.
Grouping connected_components(const TaskMatrix& W, double threshold);

/// Rows of the eigenvector block, one embedding per node.
std::vector<Eigen::VectorXd> embeddings(const Eigen::MatrixXd& V);

/// Support cutoff used when the caller does not provide one: 1e-8 * max|W|.
double default_support_threshold(const TaskMatrix& W);

}  // namespace tfcl
