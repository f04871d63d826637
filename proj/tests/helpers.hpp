#pragma once

#include <Eigen/Dense>
#include <random>

#include "tfcl/dataset.hpp"

namespace testutil {

inline Eigen::MatrixXd randn(std::mt19937_64& rng, int rows, int cols,
                             double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = n(rng);
  return M;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n) {
  const Eigen::MatrixXd B = randn(rng, n, n);
  return 0.5 * (B + B.transpose());
}

inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n) {
  const Eigen::MatrixXd B = randn(rng, n, n);
  return B.transpose() * B;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  const Eigen::MatrixXd B = randn(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  Eigen::MatrixXd Q = qr.householderQ();
  // fix signs for determinism across platforms
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0) Q.col(j) = -Q.col(j);
  return Q;
}

/// Random classification dataset; every task gets at least one sample of
/// each class.
inline tfcl::MultiTaskDataset random_dataset(std::mt19937_64& rng, int T,
                                             int d, int max_n) {
  std::uniform_int_distribution<int> nd(2, max_n);
  tfcl::MultiTaskDataset data;
  for (int i = 0; i < T; ++i) {
    const int n = nd(rng);
    tfcl::TaskData t;
    t.X = randn(rng, n, d);
    t.y.resize(n);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int r = 0; r < n; ++r) t.y(r) = coin(rng) ? 1.0 : -1.0;
    t.y(0) = 1.0;
    t.y(1) = -1.0;
    data.tasks.push_back(std::move(t));
  }
  return data;
}

}  // namespace testutil
