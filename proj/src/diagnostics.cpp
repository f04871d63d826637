#include "tfcl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace tfcl {

namespace {

using ordered_json = nlohmann::ordered_json;

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("rand_index: label length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  double agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same_a = a[i] == a[j];
      const bool same_b = b[i] == b[j];
      if (same_a == same_b) agree += 1.0;
    }
  return agree / (0.5 * double(n) * double(n - 1));
}

}  // namespace

RecoveryReport recovery_report(const TaskMatrix& W, const GroundTruth& gt,
                               double threshold) {
  if (W.rows() != gt.w_star.rows() || W.cols() != gt.w_star.cols())
    throw std::invalid_argument("recovery_report: shape mismatch");
  if (threshold < 0)
    throw std::invalid_argument("recovery_report: negative threshold");

  long tp = 0, fp = 0, fn = 0;
  for (int j = 0; j < W.cols(); ++j)
    for (int i = 0; i < W.rows(); ++i) {
      const bool pred = std::abs(W(i, j)) > threshold;
      const bool truth = gt.w_star(i, j) != 0.0;
      if (pred && truth)
        ++tp;
      else if (pred)
        ++fp;
      else if (truth)
        ++fn;
    }

  RecoveryReport r;
  r.precision = (tp + fp) == 0 ? 1.0 : double(tp) / double(tp + fp);
  r.recall = (tp + fn) == 0 ? 1.0 : double(tp) / double(tp + fn);
  r.f1 = (r.precision + r.recall) == 0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);

  const Grouping g = connected_components(W, threshold);
  r.component_count = g.count;

  std::vector<int> truth_labels;
  truth_labels.reserve(gt.feature_block.size() + gt.task_block.size());
  truth_labels.insert(truth_labels.end(), gt.feature_block.begin(),
                      gt.feature_block.end());
  truth_labels.insert(truth_labels.end(), gt.task_block.begin(),
                      gt.task_block.end());
  r.rand_index = rand_index(g.labels, truth_labels);
  return r;
}

GroupingCertificate grouping_certificate(
    double final_objective, const Eigen::VectorXd& final_spectrum, int k,
    double alpha1, double alpha2, double C, double grad_inf_max,
    const std::vector<int>& group_sizes, std::optional<double> delta0) {
  if (k < 1 || k >= final_spectrum.size())
    throw std::invalid_argument(
        "grouping_certificate: spectrum must extend past k");
  if (alpha1 <= 0 || alpha2 <= 0 || C <= 0)
    throw std::invalid_argument(
        "grouping_certificate: alpha1, alpha2, C must be positive");
  if (group_sizes.size() < 2)
    throw std::invalid_argument(
        "grouping_certificate: need at least two groups");

  GroupingCertificate c;
  c.epsilon_T = std::max(0.0, final_objective);
  c.lambda_k = final_spectrum(k - 1);
  c.lambda_k1 = final_spectrum(k);

  c.C0 = std::sqrt(2.0 * c.epsilon_T / alpha2);
  c.kappa0 = c.C0 + grad_inf_max / C;
  c.delta1 = (C / alpha1) * c.kappa0;
  if (delta0) c.delta2 = (C / alpha1) * *delta0;

  // the two largest group sizes drive the separation scale
  std::vector<int> sizes = group_sizes;
  std::partial_sort(sizes.begin(), sizes.begin() + 2, sizes.end(),
                    std::greater<int>());
  c.beta = 1.0 / sizes[0] + 1.0 / sizes[1];

  const double lam_floor = 1e-12 * (1.0 + std::abs(final_spectrum.maxCoeff()));
  c.applicable = c.lambda_k1 > lam_floor;
  if (c.applicable) {
    c.rho = c.C0 / c.lambda_k1;
    const double N = double(final_spectrum.size());
    c.xi = c.rho * (std::sqrt(N) + std::sqrt(2.0));

    const bool eig_ok = c.lambda_k1 > c.lambda_k && c.lambda_k > 0;
    const double margin = 8.0 * std::sqrt(2.0) * c.xi;
    const bool sep_ok = (std::sqrt(2.0) / 32.0) * c.beta > c.xi;
    c.no_false_positive_condition =
        eig_ok && sep_ok && margin < c.delta1 && c.delta1 < c.beta - margin;
    if (c.delta2) {
      const double lo = std::min(c.delta1, *c.delta2);
      const double hi = std::max(c.delta1, *c.delta2);
      c.correct_grouping_condition =
          eig_ok && sep_ok && margin < lo && hi < c.beta - margin;
    }
  } else {
    c.rho = std::numeric_limits<double>::infinity();
    c.xi = std::numeric_limits<double>::infinity();
    c.no_false_positive_condition = false;
    c.correct_grouping_condition = false;
  }
  return c;
}

ConvergenceReport convergence_report(const FitHistory& history) {
  const std::size_t T = history.iterations();
  if (T == 0)
    throw std::invalid_argument("convergence_report: empty history");

  ConvergenceReport r;
  r.iterations = int(T);
  r.descent_violations = history.descent_violations();
  r.final_objective = history.objective.back();
  r.last_delta_w = history.delta_w.empty() ? 0.0 : history.delta_w.back();
  r.last_delta_u = history.delta_u.empty() ? 0.0 : history.delta_u.back();
  r.min_breve_delta =
      history.breve_delta.empty()
          ? 0.0
          : *std::min_element(history.breve_delta.begin(),
                              history.breve_delta.end());
  r.certificate_applicable = r.min_breve_delta > 0;

  auto running_mean_sq = [&](std::size_t upto) {
    double s = 0;
    for (std::size_t t = 0; t < upto; ++t)
      s += history.subgrad_bound[t] * history.subgrad_bound[t];
    return s / double(upto);
  };
  if (!history.subgrad_bound.empty()) {
    r.running_mean_sq_subgrad_final = running_mean_sq(T);
    r.running_mean_sq_subgrad_quarter = running_mean_sq(std::max<std::size_t>(1, T / 4));
    r.rate_envelope = r.running_mean_sq_subgrad_final * double(T);
  }

  double lo = history.objective[0], hi = history.objective[0];
  for (double v : history.objective) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool flat = hi - lo <= 1e-12 * (1.0 + std::abs(history.objective[0]));
  const bool moving =
      !history.subgrad_bound.empty() && history.subgrad_bound.back() > 1e-8;
  r.stagnated = T >= 2 && flat && moving;
  return r;
}

std::string to_json(const RecoveryReport& r) {
  ordered_json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["component_count"] = r.component_count;
  j["rand_index"] = r.rand_index;
  return j.dump(2);
}

std::string to_json(const GroupingCertificate& c) {
  ordered_json j;
  j["epsilon_T"] = c.epsilon_T;
  j["C0"] = c.C0;
  j["kappa0"] = c.kappa0;
  j["delta1"] = c.delta1;
  if (c.delta2)
    j["delta2"] = *c.delta2;
  else
    j["delta2"] = nullptr;
  j["beta"] = c.beta;
  j["xi"] = std::isfinite(c.xi) ? ordered_json(c.xi) : ordered_json(nullptr);
  j["rho"] = std::isfinite(c.rho) ? ordered_json(c.rho) : ordered_json(nullptr);
  j["lambda_k"] = c.lambda_k;
  j["lambda_k1"] = c.lambda_k1;
  j["applicable"] = c.applicable;
  j["no_false_positive_condition"] = c.no_false_positive_condition;
  j["correct_grouping_condition"] = c.correct_grouping_condition;
  j["empirical"] = c.empirical;
  return j.dump(2);
}

std::string to_json(const ConvergenceReport& r) {
  ordered_json j;
  j["iterations"] = r.iterations;
  j["descent_violations"] = r.descent_violations;
  j["final_objective"] = r.final_objective;
  j["last_delta_w"] = r.last_delta_w;
  j["last_delta_u"] = r.last_delta_u;
  j["min_breve_delta"] = r.min_breve_delta;
  j["certificate_applicable"] = r.certificate_applicable;
  j["running_mean_sq_subgrad_final"] = r.running_mean_sq_subgrad_final;
  j["running_mean_sq_subgrad_quarter"] = r.running_mean_sq_subgrad_quarter;
  j["rate_envelope"] = r.rate_envelope;
  j["stagnated"] = r.stagnated;
  return j.dump(2);
}

}  // namespace tfcl
