#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "tfcl/losses.hpp"
#include "tfcl/solver.hpp"

namespace tfcl {

/// Consensus / co-grouping / outlier decomposition of per-user weights:
/// the effective weight of user i is theta_c + theta_g.col(i) + theta_p.col(i).
struct PersonalizedParams {
  Eigen::VectorXd theta_c;  // length d
  Eigen::MatrixXd theta_g;  // d x T
  Eigen::MatrixXd theta_p;  // d x T

  TaskMatrix effective() const {
    return (theta_g + theta_p).colwise() + theta_c;
  }
};

enum class PersonalizedLoss { SquaredAUC, InstanceSquared };

struct QConfig {
  int k = 2;
  double lam_c = 1e-3;      // l2 weight on theta_c
  double lam_graph = 1.0;   // weight of <L(theta_g), U>
  double lam_g = 1e-3;      // l2 weight on theta_g
  double lam_p = 1.0;       // l1,2 weight on theta_p
  double C = 0.0;           // <= 0 means auto: safety * lipschitz
  double safety = 1.01;
  int max_iters = 300;
  int min_iters = 10;
  double tol_param = 1e-6;
  double tol_obj = 1e-9;
  double gap_tol = 1e-8;
  std::uint64_t seed = 0;
  PersonalizedLoss loss = PersonalizedLoss::SquaredAUC;
};

struct PersonalizedFitResult {
  PersonalizedParams params;
  Eigen::MatrixXd U;
  FitHistory history;
  bool converged = false;
  double rho = 0;
  double C = 0;
};

double objective_Q(const PersonalizedParams& params, const Eigen::MatrixXd& U,
                   const MultiTaskDataset& data, const QConfig& cfg,
                   const AUCGraphCache* cache);

/// Alternating loop over (theta_c, theta_p, theta_g/U): simultaneous
/// gradient steps from the previous iterate, then the three closed-form
/// proxes, with one U-update per iteration on the theta_g graph.
PersonalizedFitResult fit_personalized(const MultiTaskDataset& data,
                                       const QConfig& cfg);

Eigen::VectorXd predict(const PersonalizedParams& params,
                        const Eigen::MatrixXd& X, int user);

/// Independent per-task l1 (ISTA) baseline with squared loss.
TaskMatrix lasso_baseline(const MultiTaskDataset& data, double lam,
                          int max_iters = 1000, double tol = 1e-8);

}  // namespace tfcl
