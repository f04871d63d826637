#include "tfcl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tfcl {

void MultiTaskDataset::validate() const {
  if (tasks.empty()) throw std::invalid_argument("dataset has no tasks");
  const auto d = tasks.front().X.cols();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    if (t.X.rows() < 1)
      throw std::invalid_argument("task " + std::to_string(i) + " is empty");
    if (t.X.cols() != d)
      throw std::invalid_argument("inconsistent feature dimension at task " +
                                  std::to_string(i));
    if (t.y.size() != t.X.rows())
      throw std::invalid_argument("X/y length mismatch at task " +
                                  std::to_string(i));
  }
  if (!user_ids.empty() && user_ids.size() != tasks.size())
    throw std::invalid_argument("user_ids length mismatch");
}

void MultiTaskDataset::validate_for_auc() const {
  validate();
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (tasks[i].n_pos() < 1 || tasks[i].n_neg() < 1)
      throw std::invalid_argument("task " + std::to_string(i) +
                                  " is missing a class");
}

double squared_loss_value(const TaskMatrix& W, const MultiTaskDataset& data) {
  if (W.rows() != data.dim() || W.cols() != data.num_tasks())
    throw std::invalid_argument("squared_loss_value: shape mismatch");
  double v = 0;
  for (int i = 0; i < data.num_tasks(); ++i)
    v += 0.5 * (data.tasks[i].y - data.tasks[i].X * W.col(i)).squaredNorm();
  return v;
}

TaskMatrix squared_loss_grad(const TaskMatrix& W, const MultiTaskDataset& data) {
  if (W.rows() != data.dim() || W.cols() != data.num_tasks())
    throw std::invalid_argument("squared_loss_grad: shape mismatch");
  TaskMatrix G(W.rows(), W.cols());
  for (int i = 0; i < data.num_tasks(); ++i) {
    const auto& t = data.tasks[i];
    G.col(i) = t.X.transpose() * (t.X * W.col(i) - t.y);
  }
  return G;
}

double SquaredLoss::value(const TaskMatrix& W,
                          const MultiTaskDataset& data) const {
  return squared_loss_value(W, data);
}
TaskMatrix SquaredLoss::grad(const TaskMatrix& W,
                             const MultiTaskDataset& data) const {
  return squared_loss_grad(W, data);
}
double SquaredLoss::lipschitz(const MultiTaskDataset& data) const {
  return lipschitz_squared(data);
}

AUCGraphCache make_auc_cache(const MultiTaskDataset& data) {
  data.validate_for_auc();
  AUCGraphCache cache;
  cache.tasks.reserve(data.tasks.size());
  for (const auto& t : data.tasks) {
    AUCTaskCache c;
    c.n_pos = t.n_pos();
    c.n_neg = t.n_neg();
    c.y01 = ((t.y.array() > 0).cast<double>()).matrix();
    c.degree = c.y01 / c.n_pos +
               (Eigen::VectorXd::Ones(t.n()) - c.y01) / c.n_neg;
    cache.tasks.push_back(std::move(c));
  }
  return cache;
}

double auc_loss_value(const TaskMatrix& W, const MultiTaskDataset& data,
                      const AUCGraphCache& cache) {
  if (W.cols() != data.num_tasks() ||
      cache.tasks.size() != data.tasks.size())
    throw std::invalid_argument("auc_loss_value: shape mismatch");
  double v = 0;
  for (int i = 0; i < data.num_tasks(); ++i) {
    const auto& t = data.tasks[i];
    const auto& c = cache.tasks[i];
    const Eigen::VectorXd r = t.X * W.col(i) - c.y01;
    const double r_pos = c.y01.dot(r) / c.n_pos;
    const double r_neg =
        (Eigen::VectorXd::Ones(t.n()) - c.y01).dot(r) / c.n_neg;
    // r^T L r with L = diag(degree) - rank-2 pair affinity
    v += r.dot(c.degree.cwiseProduct(r)) - 2.0 * r_pos * r_neg;
  }
  return v;
}

TaskMatrix auc_loss_grad(const TaskMatrix& W, const MultiTaskDataset& data,
                         const AUCGraphCache& cache) {
  if (W.cols() != data.num_tasks() ||
      cache.tasks.size() != data.tasks.size())
    throw std::invalid_argument("auc_loss_grad: shape mismatch");
  TaskMatrix G(W.rows(), W.cols());
  for (int i = 0; i < data.num_tasks(); ++i) {
    const auto& t = data.tasks[i];
    const auto& c = cache.tasks[i];
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(t.n());
    const Eigen::VectorXd r = t.X * W.col(i) - c.y01;
    const double r_pos = c.y01.dot(r) / c.n_pos;
    const double r_neg = (ones - c.y01).dot(r) / c.n_neg;
    const Eigen::VectorXd x_pos = t.X.transpose() * c.y01 / c.n_pos;
    const Eigen::VectorXd x_neg = t.X.transpose() * (ones - c.y01) / c.n_neg;
    G.col(i) = 2.0 * (t.X.transpose() * c.degree.cwiseProduct(r) -
                      x_pos * r_neg - x_neg * r_pos);
  }
  return G;
}

double spectral_norm(const Eigen::MatrixXd& A, double tol, int max_iters) {
  if (A.size() == 0) return 0.0;
  // power iteration on A^T A; fixed-seed start for reproducible results
  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(A.cols());
  for (int i = 0; i < v.size(); ++i) v(i) = u(rng);
  v.normalize();
  double prev = 0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = A.transpose() * (A * v);
    const double norm = w.norm();
    if (norm == 0) return 0.0;
    v = w / norm;
    const double cur = std::sqrt(norm);
    if (std::abs(cur - prev) <= tol * std::max(1.0, cur)) return cur;
    prev = cur;
  }
  return prev;
}

double lipschitz_squared(const MultiTaskDataset& data) {
  data.validate();
  double m = 0;
  for (const auto& t : data.tasks) {
    const double s = spectral_norm(t.X);
    m = std::max(m, s * s);
  }
  return m;
}

double lipschitz_personalized(const MultiTaskDataset& data) {
  data.validate_for_auc();
  const double T = data.num_tasks();
  double m = 0;
  for (const auto& t : data.tasks) {
    const double theta = spectral_norm(t.X);
    m = std::max(m, t.n() * theta * theta /
                        (static_cast<double>(t.n_pos()) * t.n_neg()));
  }
  return 3.0 * T * std::sqrt(2.0 * T + 1.0) * m;
}

double auc_metric(const Eigen::VectorXd& scores,
                  const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("auc_metric: size mismatch");
  double wins = 0;
  long pairs = 0;
  for (int p = 0; p < scores.size(); ++p) {
    if (labels(p) <= 0) continue;
    for (int q = 0; q < scores.size(); ++q) {
      if (labels(q) > 0) continue;
      ++pairs;
      if (scores(p) > scores(q))
        wins += 1.0;
      else if (scores(p) == scores(q))
        wins += 0.5;
    }
  }
  if (pairs == 0)
    throw std::invalid_argument("auc_metric: need both classes");
  return wins / pairs;
}

double mean_user_auc(const TaskMatrix& W, const MultiTaskDataset& data) {
  double sum = 0;
  for (int i = 0; i < data.num_tasks(); ++i)
    sum += auc_metric(data.tasks[i].X * W.col(i), data.tasks[i].y);
  return sum / data.num_tasks();
}

}  // namespace tfcl
