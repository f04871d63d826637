#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tfcl/bipartite.hpp"
#include "tfcl/dataset.hpp"

namespace tfcl {

/// Empirical loss plugged into the alternating solver. Columns of W are
/// per-task weight vectors.
struct Loss {
  virtual ~Loss() = default;
  virtual double value(const TaskMatrix& W,
                       const MultiTaskDataset& data) const = 0;
  virtual TaskMatrix grad(const TaskMatrix& W,
                          const MultiTaskDataset& data) const = 0;
  /// A valid Lipschitz constant for grad.
  virtual double lipschitz(const MultiTaskDataset& data) const = 0;
};

/// sum_i 1/2 ||y_i - X_i w_i||^2
struct SquaredLoss final : Loss {
  double value(const TaskMatrix& W, const MultiTaskDataset& data) const override;
  TaskMatrix grad(const TaskMatrix& W, const MultiTaskDataset& data) const override;
  double lipschitz(const MultiTaskDataset& data) const override;
};

double squared_loss_value(const TaskMatrix& W, const MultiTaskDataset& data);
TaskMatrix squared_loss_grad(const TaskMatrix& W, const MultiTaskDataset& data);

/// Precomputed pieces of the per-task AUC comparison graph; the implied
/// Laplacian is diag(degree) minus the rank-2 pair affinity.
struct AUCTaskCache {
  Eigen::VectorXd y01;     // (1 + y)/2
  Eigen::VectorXd degree;  // y01/n_pos + (1 - y01)/n_neg
  int n_pos = 0;
  int n_neg = 0;
};

struct AUCGraphCache {
  std::vector<AUCTaskCache> tasks;
};

/// Throws std::invalid_argument when a task is missing a class.
AUCGraphCache make_auc_cache(const MultiTaskDataset& data);

/// Pairwise squared AUC surrogate,
///   sum_i sum_{p in S+} sum_{q in S-} (1 - (yhat_p - yhat_q))^2 / (n+ n-),
/// evaluated in O(sum n_i d) through residual projections.
double auc_loss_value(const TaskMatrix& W, const MultiTaskDataset& data,
                      const AUCGraphCache& cache);

/// Exact gradient of auc_loss_value with respect to each task column,
/// 2 X^T L_AUC (X w - y01); the consensus gradient is the row-wise sum.
TaskMatrix auc_loss_grad(const TaskMatrix& W, const MultiTaskDataset& data,
                         const AUCGraphCache& cache);

/// max_i ||X_i^T X_i||_2, a Lipschitz constant for the squared loss
/// gradient (columns decouple). Power iteration, deterministic seed.
double lipschitz_squared(const MultiTaskDataset& data);

/// 3 T sqrt(2T+1) max_i { n_i ||X_i||_2^2 / (n_{+,i} n_{-,i}) }
double lipschitz_personalized(const MultiTaskDataset& data);

/// Mann-Whitney AUC with ties counted 1/2.
double auc_metric(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

/// Average of user-wise AUC over all tasks, scoring with W columns.
double mean_user_auc(const TaskMatrix& W, const MultiTaskDataset& data);

/// Spectral norm via power iteration (deterministic start).
double spectral_norm(const Eigen::MatrixXd& A, double tol = 1e-6,
                     int max_iters = 500);

}  // namespace tfcl
