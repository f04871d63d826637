// tfcl command-line front end: generate synthetic data, fit models,
// evaluate AUC, and score structure recovery. Config-file driven; every
// command is deterministic given config + seed.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tfcl/data.hpp"
#include "tfcl/diagnostics.hpp"
#include "tfcl/personalized.hpp"
#include "tfcl/solver.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using tfcl::TaskMatrix;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------- utilities

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error(msg);
}

ordered_json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail("config parse error in " + path + ": " + e.what());
  }
  if (!j.is_object()) fail("config root must be a JSON object");
  return j;
}

void check_keys(const ordered_json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      fail("unknown key '" + it.key() + "' in " + where);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(const ordered_json& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(cfg.dump())));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void write_matrix_csv(const fs::path& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path.string());
  char buf[64];
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::string cell =
          line.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start);
      row.push_back(std::stod(cell));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail("ragged matrix CSV: " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("empty matrix CSV: " + path.string());
  Eigen::MatrixXd M(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(i, j) = rows[i][j];
  return M;
}

void write_provenance(const fs::path& out_dir, const std::string& command,
                      const ordered_json& cfg, std::uint64_t seed) {
  ordered_json p;
  p["tool"] = "tfcl";
  p["version"] = kToolVersion;
  p["command"] = command;
  p["seed"] = seed;
  p["config_hash"] = config_hash(cfg);
  p["config"] = cfg;
  write_text(out_dir / "provenance.json", p.dump(2));
}

void apply_thread_cap() {
  if (const char* env = std::getenv("TFCL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

double get_num(const ordered_json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) fail("key '" + key + "' must be a number");
  return j[key].get<double>();
}

// ---------------------------------------------------------------- generate

tfcl::SimulatedSpec parse_spec(const ordered_json& j) {
  check_keys(j, {"users", "features", "samples_per_user", "blocks",
                 "centroid_ranges", "block_noise_sd", "score_noise_sd",
                 "positives_per_user", "seed"},
             "spec");
  tfcl::SimulatedSpec s;
  s.users = int(get_num(j, "users", s.users));
  s.features = int(get_num(j, "features", s.features));
  s.samples_per_user = int(get_num(j, "samples_per_user", s.samples_per_user));
  if (j.contains("blocks")) {
    s.blocks.clear();
    for (const auto& b : j["blocks"]) {
      if (!b.is_array() || b.size() != 2)
        fail("spec.blocks entries must be [rows, cols] pairs");
      s.blocks.emplace_back(b[0].get<int>(), b[1].get<int>());
    }
  }
  if (j.contains("centroid_ranges"))
    s.centroid_ranges = j["centroid_ranges"].get<std::vector<double>>();
  s.block_noise_sd = get_num(j, "block_noise_sd", s.block_noise_sd);
  s.score_noise_sd = get_num(j, "score_noise_sd", s.score_noise_sd);
  s.positives_per_user =
      int(get_num(j, "positives_per_user", s.positives_per_user));
  s.seed = std::uint64_t(get_num(j, "seed", double(s.seed)));
  return s;
}

int cmd_generate(const ordered_json& cfg, const fs::path& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  check_keys(cfg, {"spec", "seed"}, "config");
  tfcl::SimulatedSpec spec =
      cfg.contains("spec") ? parse_spec(cfg["spec"]) : tfcl::SimulatedSpec{};
  if (cfg.contains("seed")) spec.seed = cfg["seed"].get<std::uint64_t>();
  if (seed_override) spec.seed = *seed_override;

  auto [data, gt] = tfcl::generate_simulated(spec);
  fs::create_directories(out_dir);
  tfcl::save_dataset(data, (out_dir / "dataset.csv").string());

  ordered_json g;
  g["d"] = data.dim();
  g["T"] = data.num_tasks();
  const int n_blocks =
      1 + *std::max_element(gt.feature_block.begin(), gt.feature_block.end());
  g["blocks"] = ordered_json::array();
  for (int b = 0; b < n_blocks; ++b) {
    ordered_json blk;
    blk["features"] = ordered_json::array();
    blk["tasks"] = ordered_json::array();
    for (std::size_t i = 0; i < gt.feature_block.size(); ++i)
      if (gt.feature_block[i] == b) blk["features"].push_back(i);
    for (std::size_t j = 0; j < gt.task_block.size(); ++j)
      if (gt.task_block[j] == b) blk["tasks"].push_back(j);
    g["blocks"].push_back(std::move(blk));
  }
  g["w_star_path"] = "w_star.csv";
  write_text(out_dir / "ground_truth.json", g.dump(2));
  write_matrix_csv(out_dir / "w_star.csv", gt.w_star);
  write_provenance(out_dir, "generate", cfg, spec.seed);
  std::cout << "wrote " << (out_dir / "dataset.csv").string() << " ("
            << data.num_tasks() << " users, " << data.dim() << " features)\n";
  return 0;
}

// --------------------------------------------------------------------- fit

struct FitOutputs {
  TaskMatrix W;             // effective per-task weights
  tfcl::FitHistory history;
  bool converged = false;
  double final_objective = 0;
  double grad_inf_final = 0;
  Eigen::VectorXd spectrum;  // final bipartite Laplacian spectrum
  ordered_json extra;        // model-specific report fields
  std::optional<tfcl::PersonalizedParams> personalized;
};

tfcl::QConfig parse_qconfig(const ordered_json& cfg) {
  tfcl::QConfig q;
  q.k = int(get_num(cfg, "k", q.k));
  q.lam_c = get_num(cfg, "lam_c", q.lam_c);
  q.lam_graph = get_num(cfg, "lam_graph", q.lam_graph);
  q.lam_g = get_num(cfg, "lam_g", q.lam_g);
  q.lam_p = get_num(cfg, "lam_p", q.lam_p);
  q.C = get_num(cfg, "C", q.C);
  q.safety = get_num(cfg, "safety", q.safety);
  q.max_iters = int(get_num(cfg, "max_iters", q.max_iters));
  q.min_iters = int(get_num(cfg, "min_iters", q.min_iters));
  q.tol_param = get_num(cfg, "tol_param", q.tol_param);
  q.tol_obj = get_num(cfg, "tol_obj", q.tol_obj);
  q.gap_tol = get_num(cfg, "gap_tol", q.gap_tol);
  q.seed = std::uint64_t(get_num(cfg, "seed", double(q.seed)));
  const std::string loss = cfg.value("loss", std::string("auc"));
  if (loss == "auc")
    q.loss = tfcl::PersonalizedLoss::SquaredAUC;
  else if (loss == "squared")
    q.loss = tfcl::PersonalizedLoss::InstanceSquared;
  else
    fail("loss must be 'auc' or 'squared'");
  return q;
}

FitOutputs run_personalized(const tfcl::MultiTaskDataset& train,
                            const tfcl::QConfig& q) {
  auto res = tfcl::fit_personalized(train, q);
  FitOutputs out;
  out.W = res.params.effective();
  out.history = std::move(res.history);
  out.converged = res.converged;
  out.final_objective = out.history.objective.back();

  tfcl::AUCGraphCache cache;
  const bool auc = q.loss == tfcl::PersonalizedLoss::SquaredAUC;
  if (auc) cache = tfcl::make_auc_cache(train);
  const TaskMatrix G = auc ? tfcl::auc_loss_grad(out.W, train, cache)
                           : tfcl::squared_loss_grad(out.W, train);
  out.grad_inf_final = G.cwiseAbs().maxCoeff();

  const auto L = tfcl::build_laplacian(res.params.theta_g);
  out.spectrum = L.is_zero() ? Eigen::VectorXd::Zero(L.size())
                             : tfcl::sym_eig(L.matrix).values;
  out.extra["model"] = "personalized";
  out.extra["k"] = q.k;
  out.extra["lam_c"] = q.lam_c;
  out.extra["lam_graph"] = q.lam_graph;
  out.extra["lam_g"] = q.lam_g;
  out.extra["lam_p"] = q.lam_p;
  out.extra["loss"] =
      q.loss == tfcl::PersonalizedLoss::SquaredAUC ? "auc" : "squared";
  out.extra["C"] = res.C;
  out.extra["rho"] = res.rho;
  out.personalized = std::move(res.params);
  return out;
}

FitOutputs run_base(const tfcl::MultiTaskDataset& train,
                    const ordered_json& cfg) {
  tfcl::TFCLConfig c;
  c.k = int(get_num(cfg, "k", c.k));
  c.alpha1 = get_num(cfg, "alpha1", c.alpha1);
  c.alpha2 = get_num(cfg, "alpha2", c.alpha2);
  c.C = get_num(cfg, "C", c.C);
  c.safety = get_num(cfg, "safety", c.safety);
  c.max_iters = int(get_num(cfg, "max_iters", c.max_iters));
  c.min_iters = int(get_num(cfg, "min_iters", c.min_iters));
  c.tol_param = get_num(cfg, "tol_param", c.tol_param);
  c.tol_obj = get_num(cfg, "tol_obj", c.tol_obj);
  c.gap_tol = get_num(cfg, "gap_tol", c.gap_tol);
  c.seed = std::uint64_t(get_num(cfg, "seed", double(c.seed)));
  if (cfg.value("loss", std::string("squared")) != "squared")
    fail("base model supports loss 'squared' only");

  tfcl::SquaredLoss loss;
  auto res = tfcl::fit(train, loss, c);
  FitOutputs out;
  out.W = std::move(res.W);
  out.history = std::move(res.history);
  out.converged = res.converged;
  out.final_objective = out.history.objective.back();
  out.grad_inf_final =
      tfcl::squared_loss_grad(out.W, train).cwiseAbs().maxCoeff();
  const auto L = tfcl::build_laplacian(out.W);
  out.spectrum = L.is_zero() ? Eigen::VectorXd::Zero(L.size())
                             : tfcl::sym_eig(L.matrix).values;
  out.extra["model"] = "base";
  out.extra["k"] = c.k;
  out.extra["alpha1"] = c.alpha1;
  out.extra["alpha2"] = c.alpha2;
  out.extra["loss"] = "squared";
  out.extra["C"] = res.C;
  out.extra["rho"] = res.rho;
  return out;
}

void write_history_csv(const fs::path& path, const tfcl::FitHistory& h) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path.string());
  // wall time is deliberately omitted so reruns are bit-identical
  out << "objective,delta_w,delta_u,subgrad_bound,breve_delta,frozen_u\n";
  char buf[64];
  for (std::size_t t = 0; t < h.iterations(); ++t) {
    auto cell = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    out << cell(h.objective[t]) << ',' << cell(h.delta_w[t]) << ','
        << cell(h.delta_u[t]) << ',' << cell(h.subgrad_bound[t]) << ','
        << cell(h.breve_delta[t]) << ',' << int(h.frozen_u[t]) << "\n";
  }
}

int cmd_fit(const ordered_json& cfg, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_override) {
  check_keys(cfg,
             {"model", "data", "loss", "k", "alpha1", "alpha2", "lam_c",
              "lam_graph", "lam_g", "lam_p", "C", "safety", "max_iters",
              "min_iters", "tol_param", "tol_obj", "gap_tol", "seed", "split",
              "grid"},
             "config");
  const std::string model = cfg.value("model", std::string("base"));
  if (model != "base" && model != "personalized")
    fail("model must be 'base' or 'personalized'");
  if (!cfg.contains("data")) fail("fit config requires 'data'");

  ordered_json eff = cfg;
  if (seed_override) eff["seed"] = *seed_override;
  const std::uint64_t seed =
      std::uint64_t(get_num(eff, "seed", 0.0));

  tfcl::MultiTaskDataset all =
      tfcl::load_dataset(eff["data"].get<std::string>());
  tfcl::MultiTaskDataset train = all;
  std::optional<tfcl::SplitResult> parts;
  if (eff.contains("split")) {
    const auto& sp = eff["split"];
    check_keys(sp, {"train", "val", "test", "seed"}, "config.split");
    parts = tfcl::split(all, get_num(sp, "train", 0.70),
                        get_num(sp, "val", 0.15), get_num(sp, "test", 0.15),
                        std::uint64_t(get_num(sp, "seed", double(seed))));
    train = parts->train;
  }

  // grid search: cartesian product over array-valued hyperparameters,
  // sequential, winner by mean validation AUC
  std::vector<ordered_json> grid_points;
  if (eff.contains("grid")) {
    if (!parts)
      fail("grid search requires a 'split' section for validation scoring");
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    for (auto it = eff["grid"].begin(); it != eff["grid"].end(); ++it) {
      if (!it.value().is_array()) fail("grid values must be arrays");
      axes.emplace_back(it.key(), it.value().get<std::vector<double>>());
    }
    grid_points.push_back(ordered_json::object());
    for (const auto& [key, vals] : axes) {
      std::vector<ordered_json> next;
      for (const auto& p : grid_points)
        for (double v : vals) {
          ordered_json q = p;
          q[key] = v;
          next.push_back(std::move(q));
        }
      grid_points = std::move(next);
    }
  } else {
    grid_points.push_back(ordered_json::object());
  }

  std::optional<FitOutputs> best;
  double best_val = -1;
  ordered_json best_point;
  for (const auto& point : grid_points) {
    ordered_json run_cfg = eff;
    for (auto it = point.begin(); it != point.end(); ++it)
      run_cfg[it.key()] = it.value();
    FitOutputs out = model == "personalized"
                         ? run_personalized(train, parse_qconfig(run_cfg))
                         : run_base(train, run_cfg);
    double score = 0;
    if (parts && parts->val.num_tasks() > 0)
      score = tfcl::mean_user_auc(out.W, parts->val);
    if (!best || score > best_val) {
      best_val = score;
      best = std::move(out);
      best_point = point;
    }
  }

  fs::create_directories(out_dir);
  FitOutputs& out = *best;
  write_matrix_csv(out_dir / "W.csv", out.W);
  if (out.personalized) {
    write_matrix_csv(out_dir / "theta_c.csv", out.personalized->theta_c);
    write_matrix_csv(out_dir / "theta_g.csv", out.personalized->theta_g);
    write_matrix_csv(out_dir / "theta_p.csv", out.personalized->theta_p);
  }
  write_matrix_csv(out_dir / "spectrum.csv", out.spectrum);
  write_history_csv(out_dir / "history.csv", out.history);
  write_text(out_dir / "convergence.json",
             tfcl::to_json(tfcl::convergence_report(out.history)));

  ordered_json meta = out.extra;
  meta["converged"] = out.converged;
  meta["iterations"] = int(out.history.iterations());
  meta["final_objective"] = out.final_objective;
  meta["grad_inf_final"] = out.grad_inf_final;
  if (!best_point.empty()) meta["grid_winner"] = best_point;
  if (parts) {
    meta["train_auc"] = tfcl::mean_user_auc(out.W, parts->train);
    if (parts->val.num_tasks() > 0) meta["val_auc"] = best_val;
    if (parts->test.num_tasks() > 0)
      meta["test_auc"] = tfcl::mean_user_auc(out.W, parts->test);
  }
  write_text(out_dir / "fit_meta.json", meta.dump(2));
  write_provenance(out_dir, "fit", cfg, seed);

  std::cout << (out.converged ? "converged" : "stopped at max_iters")
            << " after " << out.history.iterations() << " iterations, final "
            << "objective " << out.final_objective << "\n";
  return out.converged ? 0 : 2;
}

// -------------------------------------------------------------------- eval

int cmd_eval(const ordered_json& cfg, const fs::path& out_dir) {
  check_keys(cfg, {"model_dir", "data"}, "config");
  if (!cfg.contains("model_dir") || !cfg.contains("data"))
    fail("eval config requires 'model_dir' and 'data'");
  const fs::path model_dir = cfg["model_dir"].get<std::string>();
  const TaskMatrix W = read_matrix_csv(model_dir / "W.csv");
  tfcl::MultiTaskDataset data =
      tfcl::load_dataset(cfg["data"].get<std::string>());
  if (W.cols() != data.num_tasks() || W.rows() != data.dim())
    fail("model/data shape mismatch: W is " + std::to_string(W.rows()) + "x" +
         std::to_string(W.cols()));

  std::vector<double> per_user(data.num_tasks());
  for (int i = 0; i < data.num_tasks(); ++i)
    per_user[i] =
        tfcl::auc_metric(data.tasks[i].X * W.col(i), data.tasks[i].y);
  std::vector<double> sorted = per_user;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (sorted.size() - 1);
    const std::size_t lo = std::size_t(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
  };
  const double mean =
      std::accumulate(per_user.begin(), per_user.end(), 0.0) / per_user.size();

  ordered_json r;
  r["mean_user_auc"] = mean;
  r["quantiles"] = {{"min", sorted.front()},  {"p25", quantile(0.25)},
                    {"median", quantile(0.5)}, {"p75", quantile(0.75)},
                    {"max", sorted.back()}};
  r["per_user_auc"] = per_user;
  fs::create_directories(out_dir);
  write_text(out_dir / "eval.json", r.dump(2));
  std::cout << "mean user AUC: " << mean << "\n"
            << "min/p25/median/p75/max: " << sorted.front() << " "
            << quantile(0.25) << " " << quantile(0.5) << " " << quantile(0.75)
            << " " << sorted.back() << "\n";
  return 0;
}

// ----------------------------------------------------------------- recover

int cmd_recover(const ordered_json& cfg, const fs::path& out_dir) {
  check_keys(cfg, {"model_dir", "ground_truth_dir", "threshold"}, "config");
  if (!cfg.contains("model_dir") || !cfg.contains("ground_truth_dir"))
    fail("recover config requires 'model_dir' and 'ground_truth_dir'");
  const fs::path model_dir = cfg["model_dir"].get<std::string>();
  const fs::path gt_dir = cfg["ground_truth_dir"].get<std::string>();

  const fs::path w_path = fs::exists(model_dir / "theta_g.csv")
                              ? model_dir / "theta_g.csv"
                              : model_dir / "W.csv";
  const TaskMatrix W = read_matrix_csv(w_path);

  tfcl::GroundTruth gt;
  {
    std::ifstream in(gt_dir / "ground_truth.json");
    if (!in) fail("cannot open " + (gt_dir / "ground_truth.json").string());
    ordered_json g;
    in >> g;
    gt.w_star = read_matrix_csv(
        gt_dir / g.value("w_star_path", std::string("w_star.csv")));
    gt.feature_block.assign(g["d"].get<int>(), -1);
    gt.task_block.assign(g["T"].get<int>(), -1);
    int b = 0;
    for (const auto& blk : g["blocks"]) {
      for (int i : blk["features"].get<std::vector<int>>())
        gt.feature_block[i] = b;
      for (int j : blk["tasks"].get<std::vector<int>>()) gt.task_block[j] = b;
      ++b;
    }
  }

  const double threshold = cfg.contains("threshold")
                               ? cfg["threshold"].get<double>()
                               : tfcl::default_support_threshold(W);
  const tfcl::RecoveryReport rep = tfcl::recovery_report(W, gt, threshold);
  fs::create_directories(out_dir);
  write_text(out_dir / "recovery.json", tfcl::to_json(rep));
  write_matrix_csv(out_dir / "W_abs.csv", W.cwiseAbs());
  std::cout << "support precision " << rep.precision << ", recall "
            << rep.recall << ", F1 " << rep.f1 << ", components "
            << rep.component_count << ", Rand index " << rep.rand_index
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-task learning with task-feature co-clustering"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the config seed");
  };
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset");
  CLI::App* fit = app.add_subcommand("fit", "fit a model");
  CLI::App* eval = app.add_subcommand("eval", "score a fitted model");
  CLI::App* recover = app.add_subcommand("recover", "score structure recovery");
  for (CLI::App* sub : {generate, fit, eval, recover}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  apply_thread_cap();

  try {
    const ordered_json cfg = read_config(config_path);
    if (generate->parsed()) return cmd_generate(cfg, out_dir, seed);
    if (fit->parsed()) return cmd_fit(cfg, out_dir, seed);
    if (eval->parsed()) return cmd_eval(cfg, out_dir);
    return cmd_recover(cfg, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
