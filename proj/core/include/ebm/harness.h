// Copyright 2026 The ebm-sphere Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef EBM_HARNESS_H_
#define EBM_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ebm/metrics.h"
#include "ebm/teacher.h"
#include "ebm/train.h"

namespace ebm {

// Everything a subcommand needs, parsed from one JSON document. Unknown keys
// are rejected so typos surface as config errors.
struct ExperimentConfig {
  int d = 0;
  // Inline teacher: weights plus optional features (random otherwise).
  std::optional<Vec> teacher_weights;
  std::optional<Mat> teacher_features;
  std::string teacher_file;  // alternative to the inline teacher

  std::vector<std::int64_t> train_sizes;
  std::int64_t n_valid = 2000;
  std::int64_t n_test = 5000;
  std::int64_t n_test_f1sd = 2000;
  std::vector<Estimator> estimators = {Estimator::kMle};
  std::vector<Regime> regimes = {Regime::kF1, Regime::kF2};
  std::map<Estimator, std::vector<double>> step_size_grid;
  std::vector<double> lambda_grid = {0.0};
  int n_seeds = 10;
  Eigen::Index m = 500;
  int n_iters = 1000;
  std::uint64_t base_seed = 0;
  std::string output_dir = "out";
  double init_weight_scale = 1.0;

  MhConfig sampler;
  std::int64_t n_mc = 0;
  KernelSpec kernel;
  F1sdConfig inner;
  MinSearchOptions min_search;
  std::int64_t grid_kl_points = 20000;
  std::int64_t n_z = 20000;
  std::int64_t max_proposals = 0;

  // Single-run settings for the train subcommand.
  struct Single {
    Estimator estimator = Estimator::kMle;
    Regime regime = Regime::kF1;
    std::optional<double> step_size;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    std::int64_t n_train = 0;  // 0 = whole file
  } single;
  // Which data seed index cmd_sample writes.
  int sample_seed_index = 0;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  void validate() const;

  TrainConfig train_config(Estimator estimator, Regime regime, double step_size, double lambda,
                           std::uint64_t seed) const;
};

// Teacher from the config: teacher_file, else inline weights with features
// given or drawn from derive_stream(base_seed, "teacher").
TeacherSpec resolve_teacher(const ExperimentConfig& cfg);

struct DataSplits {
  Mat train;
  Mat valid;
  Mat test;
};

// Rejection samples for one data seed; every split has its own stream
// derive_stream(base_seed, "data/<split>", {seed_index}).
DataSplits generate_splits(const ExperimentConfig& cfg, const TeacherSpec& teacher, double fmin,
                           int seed_index);
double teacher_min(const ExperimentConfig& cfg, const TeacherSpec& teacher);

struct ResultRow {
  std::string estimator;
  std::string regime;
  std::int64_t n_train = 0;
  int seed = 0;
  std::string metric;
  std::optional<double> value;  // empty = failed
  std::string config_id;
};

std::string format_results(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results(const std::string& csv);

// Test metrics reported for models trained with an estimator.
std::vector<Metric> metrics_for(Estimator estimator);

// Subcommands. Each writes under out_dir and returns the paths it wrote.
std::filesystem::path cmd_teacher_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> cmd_sample(const ExperimentConfig& cfg,
                                              const std::filesystem::path& out_dir);
std::vector<std::filesystem::path> cmd_train(const ExperimentConfig& cfg,
                                             const std::filesystem::path& out_dir);
std::filesystem::path cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
std::filesystem::path cmd_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                int jobs);
std::vector<std::filesystem::path> cmd_plot(const std::filesystem::path& out_dir);

// Aggregation used by cmd_plot: mean and sample standard deviation (n - 1
// denominator; 0 when only one value) per (estimator, regime, n_train, metric).
struct AggregateRow {
  std::string estimator;
  std::string regime;
  std::int64_t n_train = 0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::int64_t count = 0;
};
std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows);
std::string format_aggregate(const std::vector<AggregateRow>& rows);

// Log-log plot of metric vs n_train with one series per regime, error bars of
// one standard deviation, and an optional dashed reference line.
std::string render_svg(const std::vector<AggregateRow>& rows, const std::string& estimator,
                       const std::string& metric, std::optional<double> reference);

}  // namespace ebm

#endif  // EBM_HARNESS_H_
