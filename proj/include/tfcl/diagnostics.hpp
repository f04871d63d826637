#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "tfcl/data.hpp"
#include "tfcl/solver.hpp"

namespace tfcl {

struct RecoveryReport {
  double precision = 0;  // 1.0 on empty prediction by convention
  double recall = 0;
  double f1 = 0;
  int component_count = 0;
  double rand_index = 0;  // between recovered and true node groupings
};

RecoveryReport recovery_report(const TaskMatrix& W, const GroundTruth& gt,
                               double threshold);

/// Direct substitution of the grouping-effect constants. The gradient
/// bound uses the max observed gradient infinity-norm, so the certificate
/// is empirical; booleans are plain inequality evaluations and may be
/// false.
struct GroupingCertificate {
  double epsilon_T = 0;   // final objective value
  double C0 = 0;
  double kappa0 = 0;
  double delta1 = 0;
  std::optional<double> delta2;  // needs delta0
  double beta = 0;
  double xi = 0;
  double rho = 0;
  double lambda_k = 0;
  double lambda_k1 = 0;
  bool applicable = true;  // false when lambda_{k+1} ~ 0
  bool no_false_positive_condition = false;
  bool correct_grouping_condition = false;
  bool empirical = true;
};

/// group_sizes: node counts of the ground-truth components.
/// grad_inf_max: max observed ||grad J||_inf over the run.
GroupingCertificate grouping_certificate(
    double final_objective, const Eigen::VectorXd& final_spectrum, int k,
    double alpha1, double alpha2, double C, double grad_inf_max,
    const std::vector<int>& group_sizes,
    std::optional<double> delta0 = std::nullopt);

struct ConvergenceReport {
  int iterations = 0;
  int descent_violations = 0;
  double final_objective = 0;
  double last_delta_w = 0;
  double last_delta_u = 0;
  double min_breve_delta = 0;
  bool certificate_applicable = true;  // false when min breve_delta hits 0
  double running_mean_sq_subgrad_final = 0;
  double running_mean_sq_subgrad_quarter = 0;
  double rate_envelope = 0;  // a such that mean_T ~ a / T at the end
  bool stagnated = false;
};

ConvergenceReport convergence_report(const FitHistory& history);

std::string to_json(const RecoveryReport& r);
std::string to_json(const GroupingCertificate& c);
std::string to_json(const ConvergenceReport& r);

}  // namespace tfcl
