#include "tfcl/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace tfcl {

void SimulatedSpec::validate() const {
  if (users < 1 || features < 1 || samples_per_user < 1)
    throw std::invalid_argument("SimulatedSpec: sizes must be positive");
  if (blocks.empty() || blocks.size() != centroid_ranges.size())
    throw std::invalid_argument("SimulatedSpec: blocks/centroid_ranges mismatch");
  int rows = 0, cols = 0;
  for (auto [r, c] : blocks) {
    if (r < 1 || c < 1)
      throw std::invalid_argument("SimulatedSpec: empty block");
    rows += r;
    cols += c;
  }
  if (rows != features || cols != users)
    throw std::invalid_argument(
        "SimulatedSpec: block sizes must sum to (features, users)");
  if (positives_per_user < 1 || positives_per_user >= samples_per_user)
    throw std::invalid_argument(
        "SimulatedSpec: positives_per_user out of range");
  if (block_noise_sd < 0 || score_noise_sd < 0)
    throw std::invalid_argument("SimulatedSpec: negative noise sd");
}

std::pair<MultiTaskDataset, GroundTruth> generate_simulated(
    const SimulatedSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> stdnorm(0.0, 1.0);

  const int d = spec.features;
  const int T = spec.users;

  GroundTruth gt;
  gt.w_star = TaskMatrix::Zero(d, T);
  gt.feature_block.assign(d, -1);
  gt.task_block.assign(T, -1);
  int r0 = 0, c0 = 0;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto [br, bc] = spec.blocks[b];
    std::uniform_real_distribution<double> centroid_dist(
        0.0, spec.centroid_ranges[b]);
    const double centroid = centroid_dist(rng);
    for (int i = 0; i < br; ++i)
      for (int j = 0; j < bc; ++j)
        gt.w_star(r0 + i, c0 + j) =
            centroid + spec.block_noise_sd * stdnorm(rng);
    for (int i = 0; i < br; ++i) gt.feature_block[r0 + i] = int(b);
    for (int j = 0; j < bc; ++j) gt.task_block[c0 + j] = int(b);
    r0 += br;
    c0 += bc;
  }

  MultiTaskDataset data;
  data.tasks.resize(T);
  data.user_ids.resize(T);
  for (int i = 0; i < T; ++i) {
    const int n = spec.samples_per_user;
    Eigen::MatrixXd X(n, d);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < d; ++c) X(r, c) = stdnorm(rng);
    Eigen::VectorXd score = X * gt.w_star.col(i);
    for (int r = 0; r < n; ++r)
      score(r) += spec.score_noise_sd * stdnorm(rng);

    // label the top instances positive
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score(a) > score(b); });
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, -1.0);
    for (int r = 0; r < spec.positives_per_user; ++r) y(order[r]) = 1.0;

    data.tasks[i] = {std::move(X), std::move(y)};
    data.user_ids[i] = "u" + std::to_string(i);
  }
  return {std::move(data), std::move(gt)};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

MultiTaskDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_dataset: empty file " + path);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "user_id" || header[1] != "label")
    throw std::runtime_error("load_dataset: bad header in " + path);
  const int d = static_cast<int>(header.size()) - 2;
  for (int c = 0; c < d; ++c)
    if (header[2 + c] != "f_" + std::to_string(c))
      throw std::runtime_error("load_dataset: unknown column '" +
                               header[2 + c] + "' in " + path);

  std::vector<std::string> user_order;
  std::vector<std::vector<double>> rows;  // label + features, per row
  std::vector<int> row_user;
  std::unordered_map<std::string, int> user_index;

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != d + 2)
      throw std::runtime_error("load_dataset: line " + std::to_string(lineno) +
                               ": expected " + std::to_string(d + 2) +
                               " fields, got " + std::to_string(cells.size()));
    std::vector<double> row(d + 1);
    try {
      std::size_t pos = 0;
      row[0] = std::stod(cells[1], &pos);
      if (pos != cells[1].size()) throw std::invalid_argument("");
      for (int c = 0; c < d; ++c) {
        row[1 + c] = std::stod(cells[2 + c], &pos);
        if (pos != cells[2 + c].size()) throw std::invalid_argument("");
      }
    } catch (const std::exception&) {
      throw std::runtime_error("load_dataset: line " + std::to_string(lineno) +
                               ": malformed number");
    }
    if (row[0] != 1.0 && row[0] != -1.0)
      throw std::runtime_error("load_dataset: line " + std::to_string(lineno) +
                               ": label must be -1 or 1");
    auto [it, inserted] =
        user_index.try_emplace(cells[0], int(user_order.size()));
    if (inserted) user_order.push_back(cells[0]);
    row_user.push_back(it->second);
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw std::runtime_error("load_dataset: no data rows in " + path);

  MultiTaskDataset data;
  data.user_ids = user_order;
  data.tasks.resize(user_order.size());
  std::vector<int> counts(user_order.size(), 0);
  for (int u : row_user) ++counts[u];
  for (std::size_t u = 0; u < user_order.size(); ++u) {
    data.tasks[u].X.resize(counts[u], d);
    data.tasks[u].y.resize(counts[u]);
  }
  std::vector<int> fill(user_order.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int u = row_user[r];
    const int i = fill[u]++;
    data.tasks[u].y(i) = rows[r][0];
    for (int c = 0; c < d; ++c) data.tasks[u].X(i, c) = rows[r][1 + c];
  }
  data.validate();
  return data;
}

void save_dataset(const MultiTaskDataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  const int d = data.dim();
  out << "user_id,label";
  for (int c = 0; c < d; ++c) out << ",f_" << c;
  out << "\n";
  char buf[64];
  for (int u = 0; u < data.num_tasks(); ++u) {
    const auto& t = data.tasks[u];
    const std::string id =
        data.user_ids.empty() ? "u" + std::to_string(u) : data.user_ids[u];
    for (int r = 0; r < t.n(); ++r) {
      out << id << ',' << (t.y(r) > 0 ? 1 : -1);
      for (int c = 0; c < d; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", t.X(r, c));
        out << ',' << buf;
      }
      out << "\n";
    }
  }
}

MultiTaskDataset filter_min_minority(const MultiTaskDataset& data, int m) {
  data.validate();
  MultiTaskDataset out;
  for (int u = 0; u < data.num_tasks(); ++u) {
    const auto& t = data.tasks[u];
    if (std::min(t.n_pos(), t.n_neg()) >= m) {
      out.tasks.push_back(t);
      out.user_ids.push_back(data.user_id(u).empty() ? "u" + std::to_string(u)
                                                     : data.user_id(u));
    }
  }
  if (out.tasks.empty())
    throw std::invalid_argument("filter_min_minority: no users survive m=" +
                                std::to_string(m));
  return out;
}

SplitResult split(const MultiTaskDataset& data, double f_train, double f_val,
                  double f_test, std::uint64_t seed) {
  data.validate();
  if (f_train < 0 || f_val < 0 || f_test < 0 ||
      std::abs(f_train + f_val + f_test - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must be >= 0 and sum to 1");

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  SplitResult out;
  auto& parts = out;
  for (int u = 0; u < data.num_tasks(); ++u) {
    const auto& t = data.tasks[u];
    std::vector<int> pos, neg;
    for (int r = 0; r < t.n(); ++r)
      (t.y(r) > 0 ? pos : neg).push_back(r);
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);

    auto allocate = [&](std::vector<int>& idx, std::array<std::vector<int>, 3>& dest) {
      const int n = static_cast<int>(idx.size());
      int n_train = static_cast<int>(std::lround(f_train * n));
      int n_val = static_cast<int>(std::lround(f_val * n));
      // class presence in train when this class exists and train is used
      if (f_train > 0 && n > 0 && n_train == 0) n_train = 1;
      if (n_train + n_val > n) n_val = n - n_train;
      for (int i = 0; i < n; ++i) {
        const int which = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
        dest[which].push_back(idx[i]);
      }
    };
    std::array<std::vector<int>, 3> dest;
    allocate(pos, dest);
    allocate(neg, dest);

    auto push = [&](MultiTaskDataset& ds, const std::vector<int>& idx) {
      if (idx.empty()) return;
      TaskData td;
      td.X.resize(idx.size(), t.X.cols());
      td.y.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        td.X.row(i) = t.X.row(idx[i]);
        td.y(i) = t.y(idx[i]);
      }
      ds.tasks.push_back(std::move(td));
      ds.user_ids.push_back(data.user_id(u).empty() ? "u" + std::to_string(u)
                                                    : data.user_id(u));
    };
    push(parts.train, dest[0]);
    push(parts.val, dest[1]);
    push(parts.test, dest[2]);
  }
  return out;
}

}  // namespace tfcl
