#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tfcl/bipartite.hpp"
#include "tfcl/dataset.hpp"

namespace tfcl {

/// Block-diagonal synthetic generator settings. Defaults reproduce the
/// 100-user / 80-feature benchmark layout.
struct SimulatedSpec {
  int users = 100;
  int features = 80;
  int samples_per_user = 200;
  // (feature rows, task columns) per block
  std::vector<std::pair<int, int>> blocks = {
      {20, 20}, {20, 20}, {10, 20}, {20, 20}, {10, 20}};
  std::vector<double> centroid_ranges = {5, 5, 10, 15, 20};
  double block_noise_sd = 2.5;
  double score_noise_sd = 0.1;
  int positives_per_user = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  TaskMatrix w_star;
  std::vector<int> feature_block;  // length d
  std::vector<int> task_block;     // length T
};

std::pair<MultiTaskDataset, GroundTruth> generate_simulated(
    const SimulatedSpec& spec);

/// CSV schema: header `user_id,label,f_0..f_{d-1}`; tasks appear in
/// first-seen order of user_id. Malformed rows are reported with line
/// numbers.
MultiTaskDataset load_dataset(const std::string& path);
void save_dataset(const MultiTaskDataset& data, const std::string& path);

/// Drops users with min(n_pos, n_neg) < m. Errors out when nothing
/// survives.
MultiTaskDataset filter_min_minority(const MultiTaskDataset& data, int m = 8);

struct SplitResult {
  MultiTaskDataset train, val, test;
};

/// Per-user stratified split; class presence is preserved in train.
SplitResult split(const MultiTaskDataset& data, double f_train, double f_val,
                  double f_test, std::uint64_t seed);

}  // namespace tfcl
