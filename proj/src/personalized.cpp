#include "tfcl/personalized.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "tfcl/prox.hpp"

namespace tfcl {

namespace {

double loss_value(const PersonalizedParams& p, const MultiTaskDataset& data,
                  const QConfig& cfg, const AUCGraphCache* cache) {
  const TaskMatrix W = p.effective();
  if (cfg.loss == PersonalizedLoss::SquaredAUC)
    return auc_loss_value(W, data, *cache);
  return squared_loss_value(W, data);
}

TaskMatrix loss_grad_tasks(const PersonalizedParams& p,
                           const MultiTaskDataset& data, const QConfig& cfg,
                           const AUCGraphCache* cache) {
  const TaskMatrix W = p.effective();
  if (cfg.loss == PersonalizedLoss::SquaredAUC)
    return auc_loss_grad(W, data, *cache);
  return squared_loss_grad(W, data);
}

double column_l12(const Eigen::MatrixXd& M) {
  double s = 0;
  for (int j = 0; j < M.cols(); ++j) s += M.col(j).norm();
  return s;
}

}  // namespace

double objective_Q(const PersonalizedParams& params, const Eigen::MatrixXd& U,
                   const MultiTaskDataset& data, const QConfig& cfg,
                   const AUCGraphCache* cache) {
  const int d = data.dim();
  const int T = data.num_tasks();
  const Eigen::MatrixXd D = distance_matrix(U, d, T);
  const double graph = D.cwiseProduct(params.theta_g.cwiseAbs()).sum();
  return loss_value(params, data, cfg, cache) +
         0.5 * cfg.lam_c * params.theta_c.squaredNorm() +
         cfg.lam_graph * graph +
         0.5 * cfg.lam_g * params.theta_g.squaredNorm() +
         cfg.lam_p * column_l12(params.theta_p);
}

PersonalizedFitResult fit_personalized(const MultiTaskDataset& data,
                                       const QConfig& cfg) {
  data.validate();
  AUCGraphCache cache;
  const bool auc = cfg.loss == PersonalizedLoss::SquaredAUC;
  if (auc) cache = make_auc_cache(data);

  const int d = data.dim();
  const int T = data.num_tasks();
  const int N = d + T;
  if (cfg.k < 1 || cfg.k >= N)
    throw std::invalid_argument("fit_personalized: k out of range");
  if (cfg.lam_graph <= 0 || cfg.lam_c < 0 || cfg.lam_g < 0 || cfg.lam_p < 0)
    throw std::invalid_argument("fit_personalized: invalid weights");

  PersonalizedFitResult res;
  // joint Lipschitz constant over (theta_c, theta_g, theta_p); the squared
  // loss variant uses the (T+2) structure bound on the coupling
  res.rho = auc ? lipschitz_personalized(data)
                : (T + 2.0) * lipschitz_squared(data);
  res.C = cfg.C > 0 ? cfg.C : cfg.safety * res.rho;
  if (res.C <= res.rho)
    throw std::invalid_argument(
        "fit_personalized: C must exceed the Lipschitz constant");
  const double C = res.C;

  // consensus-first warm start: ridge on the pooled data
  PersonalizedParams p;
  {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < T; ++i) {
      const auto& t = data.tasks[i];
      const Eigen::VectorXd target =
          auc ? cache.tasks[i].y01 : Eigen::VectorXd(t.y);
      A += t.X.transpose() * t.X;
      b += t.X.transpose() * target;
    }
    A.diagonal().array() += 1e-3;
    p.theta_c = A.ldlt().solve(b);
  }
  p.theta_g = Eigen::MatrixXd::Zero(d, T);
  p.theta_p = Eigen::MatrixXd::Zero(d, T);

  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, N);
  U.diagonal().head(cfg.k).setOnes();

  const double subgrad_factor =
      C + res.rho + cfg.lam_graph * (std::sqrt(double(d)) +
                                     std::sqrt(double(T)) + 2.0);
  FitHistory& h = res.history;
  int obj_hits = 0;
  double prev_obj = 0;

  for (int t = 0; t < cfg.max_iters; ++t) {
    const auto tic = std::chrono::steady_clock::now();

    // simultaneous gradient steps from the previous iterate
    const TaskMatrix G = loss_grad_tasks(p, data, cfg, &cache);
    const Eigen::VectorXd grad_c = G.rowwise().sum();
    const Eigen::VectorXd tilde_c = p.theta_c - grad_c / C;
    const Eigen::MatrixXd tilde_g = p.theta_g - G / C;
    const Eigen::MatrixXd tilde_p = p.theta_p - G / C;

    const Eigen::VectorXd next_c = l2_prox(tilde_c, cfg.lam_c / C);
    const Eigen::MatrixXd next_p = column_group_prox(tilde_p, cfg.lam_p / C);

    // theta_g: one closed-form U-update on its bipartite graph, then the
    // distance-weighted shrink
    double breve = 0;
    bool frozen = false;
    const BipartiteLaplacian L = build_laplacian(p.theta_g);
    if (L.is_zero()) {
      frozen = true;
      h.delta_u.push_back(0.0);
    } else {
      SpectralSolution sol = u_update(L, cfg.k, cfg.gap_tol);
      breve = sol.breve_delta;
      h.delta_u.push_back((sol.U - U).norm());
      U = std::move(sol.U);
    }
    const Eigen::MatrixXd D = distance_matrix(U, d, T);
    const Eigen::MatrixXd next_g = w_prox(tilde_g, D, {cfg.lam_graph, cfg.lam_g, C});

    const double dtheta = std::sqrt(
        (next_c - p.theta_c).squaredNorm() + (next_g - p.theta_g).squaredNorm() +
        (next_p - p.theta_p).squaredNorm() +
        h.delta_u.back() * h.delta_u.back());
    const double dw = std::sqrt((next_c - p.theta_c).squaredNorm() +
                                (next_g - p.theta_g).squaredNorm() +
                                (next_p - p.theta_p).squaredNorm());
    p.theta_c = next_c;
    p.theta_g = next_g;
    p.theta_p = next_p;

    const double obj = objective_Q(p, U, data, cfg, auc ? &cache : nullptr);
    if (!std::isfinite(obj))
      throw std::runtime_error("fit_personalized: non-finite objective at "
                               "iteration " + std::to_string(t));

    h.objective.push_back(obj);
    h.delta_w.push_back(dw);
    h.subgrad_bound.push_back(subgrad_factor * dtheta);
    h.breve_delta.push_back(breve);
    h.frozen_u.push_back(frozen ? 1 : 0);
    h.wall_time.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
            .count());

    if (t > 0) {
      const double rel = std::abs(obj - prev_obj) / (1.0 + std::abs(prev_obj));
      obj_hits = rel < cfg.tol_obj ? obj_hits + 1 : 0;
    }
    prev_obj = obj;
    if (t + 1 >= cfg.min_iters &&
        (dw + h.delta_u.back() <= cfg.tol_param || obj_hits >= 5)) {
      res.converged = true;
      break;
    }
  }

  res.params = std::move(p);
  res.U = std::move(U);
  return res;
}

Eigen::VectorXd predict(const PersonalizedParams& params,
                        const Eigen::MatrixXd& X, int user) {
  if (user < 0 || user >= params.theta_g.cols())
    throw std::invalid_argument("predict: user index out of range");
  return X * (params.theta_c + params.theta_g.col(user) +
              params.theta_p.col(user));
}

TaskMatrix lasso_baseline(const MultiTaskDataset& data, double lam,
                          int max_iters, double tol) {
  data.validate();
  const int d = data.dim();
  const int T = data.num_tasks();
  TaskMatrix W = TaskMatrix::Zero(d, T);
  for (int i = 0; i < T; ++i) {
    const auto& t = data.tasks[i];
    const double L = std::max(spectral_norm(t.X), 1e-12);
    const double step = 1.0 / (L * L);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    for (int it = 0; it < max_iters; ++it) {
      const Eigen::VectorXd g = t.X.transpose() * (t.X * w - t.y);
      Eigen::VectorXd v = w - step * g;
      const double thr = lam * step;
      Eigen::VectorXd next =
          v.array().sign() * (v.array().abs() - thr).max(0.0);
      const double delta = (next - w).norm();
      w = std::move(next);
      if (delta <= tol * (1.0 + w.norm())) break;
    }
    W.col(i) = w;
  }
  return W;
}

}  // namespace tfcl
