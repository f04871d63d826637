#pragma once

#include <Eigen/Dense>

namespace tfcl {

/// Weights of the W proximal subproblem.
struct ProxWeights {
  double alpha1 = 1.0;  // graph-regularizer weight, > 0
  double alpha2 = 0.0;  // l2 weight, >= 0
  double C = 1.0;       // step constant, > 0
};

/// Embedding-distance-weighted elastic-net shrink:
///   W* = sgn(Wt) * ( |Wt / (1 + alpha2/C)| - alpha1/(C+alpha2) * D )_+
/// D must be elementwise nonnegative (tiny negatives are rejected).
Eigen::MatrixXd w_prox(const Eigen::MatrixXd& W_tilde,
                       const Eigen::MatrixXd& D, const ProxWeights& w);

/// argmin 1/2 ||x - v||^2 + lam/2 ||x||^2  ->  v / (1 + lam)
Eigen::VectorXd l2_prox(const Eigen::VectorXd& v, double lam);

/// Column-wise l1,2 shrink: column j -> max(0, 1 - lam/||M_j||) * M_j.
Eigen::MatrixXd column_group_prox(const Eigen::MatrixXd& M, double lam);

}  // namespace tfcl
