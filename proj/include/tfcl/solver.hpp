#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "tfcl/bipartite.hpp"
#include "tfcl/losses.hpp"
#include "tfcl/spectral.hpp"

namespace tfcl {

struct TFCLConfig {
  int k = 2;
  double alpha1 = 1.0;
  double alpha2 = 0.0;
  double C = 0.0;         // <= 0 means auto: safety * lipschitz
  double safety = 1.01;   // must stay > 1 for the descent guarantee
  int max_iters = 500;
  int min_iters = 10;
  double tol_param = 1e-6;  // stop when ||dW||_F + ||dU||_F below this
  double tol_obj = 1e-9;    // relative objective change, 5 consecutive hits
  double gap_tol = 1e-8;
  std::uint64_t seed = 0;
};

/// Per-iteration trace of a fit run; all vectors share the same length.
struct FitHistory {
  std::vector<double> objective;
  std::vector<double> delta_w;
  std::vector<double> delta_u;
  std::vector<double> subgrad_bound;  // (C + rho + a1(sqrt d + sqrt T + 2)) ||dTheta||
  std::vector<double> breve_delta;
  std::vector<double> wall_time;      // seconds per iteration
  std::vector<char> frozen_u;         // 1 when W = 0 forced a frozen U step

  std::size_t iterations() const { return objective.size(); }
  int descent_violations(double tol = 1e-9) const;
};

struct FitResult {
  TaskMatrix W;
  Eigen::MatrixXd U;
  FitHistory history;
  bool converged = false;
  double rho = 0;  // Lipschitz constant used
  double C = 0;    // effective step constant
};

/// J(W) + alpha1 <L(W), U> + alpha2/2 ||W||_F^2, with the graph term
/// evaluated through the distance form <D(U), |W|>.
double objective_P(const TaskMatrix& W, const Eigen::MatrixXd& U,
                   const Loss& loss, const MultiTaskDataset& data,
                   const TFCLConfig& cfg);

/// Per-task ridge warm start (ridge 1e-3), deterministic.
TaskMatrix default_W0(const MultiTaskDataset& data, std::uint64_t seed);

/// Alternating U/W proximal-gradient loop: per iteration one closed-form
/// U-update on the Laplacian of the previous W, then one prox-gradient
/// W-step. Throws when C <= lipschitz or the objective turns non-finite.
FitResult fit(const MultiTaskDataset& data, const Loss& loss,
              const TFCLConfig& cfg,
              const std::optional<TaskMatrix>& W0 = std::nullopt);

}  // namespace tfcl
