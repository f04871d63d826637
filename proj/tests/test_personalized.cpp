#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "tfcl/data.hpp"
#include "tfcl/personalized.hpp"

using tfcl::MultiTaskDataset;
using tfcl::PersonalizedParams;
using tfcl::QConfig;
using tfcl::TaskMatrix;

namespace {

// independent recomputation of objective_Q, term by term
double objective_Q_oracle(const PersonalizedParams& p,
                          const Eigen::MatrixXd& U,
                          const MultiTaskDataset& data, const QConfig& cfg) {
  const auto cache = tfcl::make_auc_cache(data);
  const TaskMatrix W = p.effective();
  double v = cfg.loss == tfcl::PersonalizedLoss::SquaredAUC
                 ? tfcl::auc_loss_value(W, data, cache)
                 : tfcl::squared_loss_value(W, data);
  v += 0.5 * cfg.lam_c * p.theta_c.squaredNorm();
  const auto L = tfcl::build_laplacian(p.theta_g);
  v += cfg.lam_graph * (L.matrix.cwiseProduct(U)).sum();
  v += 0.5 * cfg.lam_g * p.theta_g.squaredNorm();
  for (int j = 0; j < p.theta_p.cols(); ++j)
    v += cfg.lam_p * p.theta_p.col(j).norm();
  return v;
}

}  // namespace

TEST_CASE("objective_Q: zero parameters reduce to the bare loss at zero") {
  std::mt19937_64 rng(5);
  MultiTaskDataset data = testutil::random_dataset(rng, 3, 4, 10);
  const auto cache = tfcl::make_auc_cache(data);
  QConfig cfg;
  PersonalizedParams p;
  p.theta_c = Eigen::VectorXd::Zero(4);
  p.theta_g = Eigen::MatrixXd::Zero(4, 3);
  p.theta_p = Eigen::MatrixXd::Zero(4, 3);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(7, 7);
  U.diagonal().head(cfg.k).setOnes();
  CHECK(tfcl::objective_Q(p, U, data, cfg, &cache) ==
        doctest::Approx(tfcl::auc_loss_value(TaskMatrix::Zero(4, 3), data,
                                             cache)));
}

TEST_CASE("objective_Q: zero weights leave only the loss term") {
  std::mt19937_64 rng(131);
  MultiTaskDataset data = testutil::random_dataset(rng, 2, 3, 10);
  const auto cache = tfcl::make_auc_cache(data);
  QConfig cfg;
  cfg.lam_c = 0;
  cfg.lam_graph = 1e-30;  // lam_graph must stay positive; negligible weight
  cfg.lam_g = 0;
  cfg.lam_p = 0;
  PersonalizedParams p;
  p.theta_c = testutil::randn(rng, 3, 1);
  p.theta_g = testutil::randn(rng, 3, 2);
  p.theta_p = testutil::randn(rng, 3, 2);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(5, 5);
  U.diagonal().head(cfg.k).setOnes();
  const double bare = tfcl::auc_loss_value(p.effective(), data, cache);
  CHECK(tfcl::objective_Q(p, U, data, cfg, &cache) ==
        doctest::Approx(bare).epsilon(1e-12));
}

TEST_CASE("objective_Q matches term-by-term recomputation") {
  std::mt19937_64 rng(137);
  MultiTaskDataset data = testutil::random_dataset(rng, 3, 4, 12);
  const auto cache = tfcl::make_auc_cache(data);
  QConfig cfg;
  cfg.lam_c = 0.4;
  cfg.lam_graph = 0.8;
  cfg.lam_g = 0.2;
  cfg.lam_p = 0.6;
  cfg.k = 2;
  PersonalizedParams p;
  p.theta_c = testutil::randn(rng, 4, 1);
  p.theta_g = testutil::randn(rng, 4, 3);
  p.theta_p = testutil::randn(rng, 4, 3);
  const auto sol = tfcl::u_update(tfcl::build_laplacian(p.theta_g), cfg.k);
  const double got = tfcl::objective_Q(p, sol.U, data, cfg, &cache);
  const double expected = objective_Q_oracle(p, sol.U, data, cfg);
  CHECK(got == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("fit_personalized: descent, history shape, exact column sparsity") {
  std::mt19937_64 rng(139);
  MultiTaskDataset data = testutil::random_dataset(rng, 4, 3, 16);
  QConfig cfg;
  cfg.k = 2;
  cfg.lam_c = 0.01;
  cfg.lam_graph = 0.1;
  cfg.lam_g = 0.01;
  cfg.lam_p = 0.5;
  cfg.max_iters = 60;
  const auto res = tfcl::fit_personalized(data, cfg);
  CHECK(res.history.descent_violations() == 0);
  CHECK(res.history.objective.size() == res.history.delta_w.size());
  for (int j = 0; j < res.params.theta_p.cols(); ++j) {
    const double norm = res.params.theta_p.col(j).norm();
    CHECK((norm == 0.0 || norm > 1e-12));
  }
}

TEST_CASE("fit_personalized: huge lam_p kills theta_p immediately") {
  std::mt19937_64 rng(149);
  MultiTaskDataset data = testutil::random_dataset(rng, 3, 3, 12);
  QConfig cfg;
  cfg.lam_p = 1e9;
  cfg.max_iters = 15;
  const auto res = tfcl::fit_personalized(data, cfg);
  CHECK(res.params.theta_p.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit_personalized: squared-loss variant also descends") {
  std::mt19937_64 rng(151);
  MultiTaskDataset data = testutil::random_dataset(rng, 3, 4, 14);
  QConfig cfg;
  cfg.loss = tfcl::PersonalizedLoss::InstanceSquared;
  cfg.max_iters = 60;
  const auto res = tfcl::fit_personalized(data, cfg);
  CHECK(res.history.descent_violations() == 0);
}

TEST_CASE("fit_personalized: rejects C below the Lipschitz constant") {
  std::mt19937_64 rng(157);
  MultiTaskDataset data = testutil::random_dataset(rng, 2, 3, 10);
  QConfig cfg;
  cfg.C = 0.5 * tfcl::lipschitz_personalized(data);
  CHECK_THROWS_AS(tfcl::fit_personalized(data, cfg), std::invalid_argument);
}

TEST_CASE("predict: zero params, shared params, and explicit dot products") {
  std::mt19937_64 rng(163);
  PersonalizedParams p;
  p.theta_c = Eigen::VectorXd::Zero(3);
  p.theta_g = Eigen::MatrixXd::Zero(3, 2);
  p.theta_p = Eigen::MatrixXd::Zero(3, 2);
  const Eigen::MatrixXd X = testutil::randn(rng, 5, 3);
  CHECK(tfcl::predict(p, X, 0).norm() == 0.0);

  p.theta_c = testutil::randn(rng, 3, 1);
  CHECK((tfcl::predict(p, X, 0) - tfcl::predict(p, X, 1)).norm() == 0.0);

  p.theta_g = testutil::randn(rng, 3, 2);
  p.theta_p = testutil::randn(rng, 3, 2);
  const Eigen::VectorXd s = tfcl::predict(p, X, 1);
  for (int r = 0; r < 5; ++r) {
    const double expected =
        X.row(r).dot((p.theta_c + p.theta_g.col(1) + p.theta_p.col(1)));
    CHECK(s(r) == doctest::Approx(expected));
  }
  CHECK_THROWS_AS(tfcl::predict(p, X, 5), std::invalid_argument);
}

TEST_CASE("lasso_baseline: limit behaviors and optimality") {
  std::mt19937_64 rng(167);
  MultiTaskDataset data;
  tfcl::TaskData t;
  t.X = testutil::randn(rng, 8, 3);
  t.y = testutil::randn(rng, 8, 1);
  data.tasks.push_back(t);

  // huge lambda kills everything
  CHECK(tfcl::lasso_baseline(data, 1e9).cwiseAbs().maxCoeff() == 0.0);

  // lam = 0 recovers least squares
  const TaskMatrix W0 = tfcl::lasso_baseline(data, 0.0, 20000, 1e-12);
  const Eigen::VectorXd ls =
      (t.X.transpose() * t.X).ldlt().solve(t.X.transpose() * t.y);
  CHECK((W0.col(0) - ls).norm() <= 1e-6 * (1.0 + ls.norm()));

  // subgradient optimality at the fixed point
  const double lam = 0.7;
  const TaskMatrix W = tfcl::lasso_baseline(data, lam, 20000, 1e-12);
  const Eigen::VectorXd g =
      t.X.transpose() * (t.X * W.col(0) - t.y);
  for (int i = 0; i < 3; ++i) {
    if (W(i, 0) != 0.0)
      CHECK(std::abs(g(i) + lam * (W(i, 0) > 0 ? 1.0 : -1.0)) <= 1e-5);
    else
      CHECK(std::abs(g(i)) <= lam + 1e-5);
  }
}

TEST_CASE("fit_personalized beats the lasso baseline on block data") {
  tfcl::SimulatedSpec spec;
  spec.users = 20;
  spec.features = 40;
  spec.samples_per_user = 60;
  spec.blocks = {{20, 10}, {20, 10}};
  spec.centroid_ranges = {5, 10};
  spec.positives_per_user = 15;
  spec.seed = 42;
  auto [data, gt] = tfcl::generate_simulated(spec);
  const auto parts = tfcl::split(data, 0.7, 0.0, 0.3, 1);

  QConfig cfg;
  cfg.k = 2;
  cfg.lam_c = 1e-3;
  cfg.lam_graph = 0.05;
  cfg.lam_g = 1e-3;
  cfg.lam_p = 0.5;
  cfg.max_iters = 250;
  const auto res = tfcl::fit_personalized(parts.train, cfg);
  const double ours =
      tfcl::mean_user_auc(res.params.effective(), parts.test);

  const TaskMatrix lasso = tfcl::lasso_baseline(parts.train, 0.1);
  const double baseline = tfcl::mean_user_auc(lasso, parts.test);
  CHECK(ours > baseline + 0.05);  // observed margin is ~0.15
  CHECK(ours > 0.8);
}
