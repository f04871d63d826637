#include "tfcl/solver.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "tfcl/prox.hpp"

namespace tfcl {

int FitHistory::descent_violations(double tol) const {
  int count = 0;
  for (std::size_t t = 1; t < objective.size(); ++t)
    if (objective[t] > objective[t - 1] +
                           tol * (1.0 + std::abs(objective[t - 1])))
      ++count;
  return count;
}

double objective_P(const TaskMatrix& W, const Eigen::MatrixXd& U,
                   const Loss& loss, const MultiTaskDataset& data,
                   const TFCLConfig& cfg) {
  const int d = static_cast<int>(W.rows());
  const int T = static_cast<int>(W.cols());
  const Eigen::MatrixXd D = distance_matrix(U, d, T);
  const double graph = D.cwiseProduct(W.cwiseAbs()).sum();
#ifndef NDEBUG
  // the distance form must agree with the trace form <L(W), U>
  const BipartiteLaplacian L = build_laplacian(W);
  const double trace_form = (L.matrix.cwiseProduct(U)).sum();
  if (std::abs(graph - trace_form) > 1e-8 * (1.0 + std::abs(trace_form)))
    throw std::logic_error("objective_P: distance/trace form mismatch");
#endif
  return loss.value(W, data) + cfg.alpha1 * graph +
         0.5 * cfg.alpha2 * W.squaredNorm();
}

TaskMatrix default_W0(const MultiTaskDataset& data, std::uint64_t /*seed*/) {
  data.validate();
  const int d = data.dim();
  const int T = data.num_tasks();
  TaskMatrix W0(d, T);
  const double ridge = 1e-3;
  for (int i = 0; i < T; ++i) {
    const auto& t = data.tasks[i];
    Eigen::MatrixXd A = t.X.transpose() * t.X;
    A.diagonal().array() += ridge;
    W0.col(i) = A.ldlt().solve(t.X.transpose() * t.y);
  }
  return W0;
}

FitResult fit(const MultiTaskDataset& data, const Loss& loss,
              const TFCLConfig& cfg, const std::optional<TaskMatrix>& W0) {
  data.validate();
  if (cfg.k < 1) throw std::invalid_argument("fit: k must be >= 1");
  if (cfg.alpha1 < 0 || cfg.alpha2 < 0 || cfg.tol_param <= 0 ||
      cfg.tol_obj <= 0 || cfg.gap_tol <= 0)
    throw std::invalid_argument("fit: invalid configuration");

  const int d = data.dim();
  const int T = data.num_tasks();
  const int N = d + T;
  if (cfg.k >= N) throw std::invalid_argument("fit: k must be < d + T");

  FitResult res;
  res.rho = loss.lipschitz(data);
  res.C = cfg.C > 0 ? cfg.C : cfg.safety * res.rho;
  if (res.C <= res.rho)
    throw std::invalid_argument("fit: step constant C must exceed the "
                                "Lipschitz constant");

  TaskMatrix W = W0 ? *W0 : default_W0(data, cfg.seed);
  if (W.rows() != d || W.cols() != T)
    throw std::invalid_argument("fit: W0 shape mismatch");

  // start from the feasible projector (I_k ; 0), refreshed at iteration 1
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, N);
  U.diagonal().head(cfg.k).setOnes();

  const double subgrad_factor =
      res.C + res.rho + cfg.alpha1 * (std::sqrt(double(d)) +
                                      std::sqrt(double(T)) + 2.0);
  FitHistory& h = res.history;
  int obj_hits = 0;
  double prev_obj = 0;

  for (int t = 0; t < cfg.max_iters; ++t) {
    const auto tic = std::chrono::steady_clock::now();

    // U subroutine
    double breve = 0;
    bool frozen = false;
    const BipartiteLaplacian L = build_laplacian(W);
    if (L.is_zero()) {
      frozen = true;  // every feasible U is optimal for L = 0; keep the old one
      breve = 0;
    } else {
      SpectralSolution sol = u_update(L, cfg.k, cfg.gap_tol);
      breve = sol.breve_delta;
      const double du = (sol.U - U).norm();
      U = std::move(sol.U);
      h.delta_u.push_back(du);
    }
    if (frozen) h.delta_u.push_back(0.0);

    // W subroutine
    const Eigen::MatrixXd D = distance_matrix(U, d, T);
    const TaskMatrix W_tilde = W - loss.grad(W, data) / res.C;
    TaskMatrix W_next =
        cfg.alpha1 > 0
            ? w_prox(W_tilde, D, {cfg.alpha1, cfg.alpha2, res.C})
            : TaskMatrix(W_tilde / (1.0 + cfg.alpha2 / res.C));
    const double dw = (W_next - W).norm();
    W = std::move(W_next);

    const double obj = objective_P(W, U, loss, data, cfg);
    if (!std::isfinite(obj))
      throw std::runtime_error("fit: non-finite objective at iteration " +
                               std::to_string(t));

    const double dtheta =
        std::sqrt(dw * dw + h.delta_u.back() * h.delta_u.back());
    h.objective.push_back(obj);
    h.delta_w.push_back(dw);
    h.subgrad_bound.push_back(subgrad_factor * dtheta);
    h.breve_delta.push_back(breve);
    h.frozen_u.push_back(frozen ? 1 : 0);
    h.wall_time.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
            .count());

    // stopping: parameter tolerance OR small relative objective change
    // over 5 consecutive iterations, after a minimum number of steps
    if (t > 0) {
      const double rel =
          std::abs(obj - prev_obj) / (1.0 + std::abs(prev_obj));
      obj_hits = rel < cfg.tol_obj ? obj_hits + 1 : 0;
    }
    prev_obj = obj;
    if (t + 1 >= cfg.min_iters &&
        (dw + h.delta_u.back() <= cfg.tol_param || obj_hits >= 5)) {
      res.converged = true;
      break;
    }
  }

  res.W = std::move(W);
  res.U = std::move(U);
  return res;
}

}  // namespace tfcl
