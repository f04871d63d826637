#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfcl {

/// Per-task training data. Rows of X are instances, y holds responses
/// (labels in {-1,+1} for ranking losses, arbitrary reals otherwise).
struct TaskData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  int n() const { return static_cast<int>(X.rows()); }
  int n_pos() const { return static_cast<int>((y.array() > 0).count()); }
  int n_neg() const { return static_cast<int>((y.array() <= 0).count()); }
};

struct MultiTaskDataset {
  std::vector<TaskData> tasks;
  std::vector<std::string> user_ids;  // parallel to tasks; may be empty

  int num_tasks() const { return static_cast<int>(tasks.size()); }

  int dim() const {
    if (tasks.empty()) throw std::invalid_argument("empty dataset");
    return static_cast<int>(tasks.front().X.cols());
  }

  const std::string& user_id(int i) const {
    static const std::string empty;
    return user_ids.empty() ? empty : user_ids[i];
  }

  /// Checks the basic shape contract: nonempty tasks, consistent feature
  /// dimension, matching X/y lengths.
  void validate() const;

  /// Additionally requires both classes present in every task (labels
  /// interpreted as sign(y)). Throws std::invalid_argument otherwise.
  void validate_for_auc() const;
};

}  // namespace tfcl
