#include "tfcl/prox.hpp"

#include <stdexcept>

namespace tfcl {

Eigen::MatrixXd w_prox(const Eigen::MatrixXd& W_tilde,
                       const Eigen::MatrixXd& D, const ProxWeights& w) {
  if (W_tilde.rows() != D.rows() || W_tilde.cols() != D.cols())
    throw std::invalid_argument("w_prox: W and D shape mismatch");
  if (w.alpha1 <= 0 || w.alpha2 < 0 || w.C <= 0)
    throw std::invalid_argument("w_prox: invalid weights");
  if (D.minCoeff() < -1e-10)
    throw std::invalid_argument("w_prox: negative distance entry");

  const double shrink = 1.0 + w.alpha2 / w.C;
  const double lam = w.alpha1 / (w.C + w.alpha2);
  Eigen::MatrixXd out(W_tilde.rows(), W_tilde.cols());
  for (int j = 0; j < W_tilde.cols(); ++j)
    for (int i = 0; i < W_tilde.rows(); ++i) {
      const double v = W_tilde(i, j) / shrink;
      const double mag = std::abs(v) - lam * std::max(0.0, D(i, j));
      // exact-threshold ties map to zero
      out(i, j) = mag > 0 ? (v > 0 ? mag : -mag) : 0.0;
    }
  return out;
}

Eigen::VectorXd l2_prox(const Eigen::VectorXd& v, double lam) {
  if (lam < 0) throw std::invalid_argument("l2_prox: negative lambda");
  return v / (1.0 + lam);
}

Eigen::MatrixXd column_group_prox(const Eigen::MatrixXd& M, double lam) {
  if (lam < 0)
    throw std::invalid_argument("column_group_prox: negative lambda");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(M.rows(), M.cols());
  for (int j = 0; j < M.cols(); ++j) {
    const double norm = M.col(j).norm();
    if (norm > lam) out.col(j) = (1.0 - lam / norm) * M.col(j);
  }
  return out;
}

}  // namespace tfcl
