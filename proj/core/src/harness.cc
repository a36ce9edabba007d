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
#include "ebm/harness.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "ebm/errors.h"
#include "ebm/io.h"

namespace ebm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads fields from a JSON object and remembers which keys were consumed so
// leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return doc_.contains(key) && !doc_.at(key).is_null();
  }

  template <typename T>
  T get(const char* key, T fallback) {
    if (!has(key)) return fallback;
    try {
      return doc_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json& at(const char* key) {
    seen_.insert(key);
    return doc_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename Fn>
auto as_config_error(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::vector<double> read_doubles(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where + " must be an array");
  std::vector<double> out;
  for (const json& v : arr) {
    if (!v.is_number()) throw ConfigError(where + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size()));
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string config_id(double step, double lambda) {
  return "step=" + fmt_g(step) + ";lambda=" + fmt_g(lambda);
}

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

// Runs fn(i) for i in [0, n) on at most 'jobs' threads. Each index writes its
// own output slot, so the result does not depend on scheduling.
template <typename Fn>
void run_pool(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::size_t(std::max(jobs, 1)), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

Mat first_rows(const Mat& m, std::int64_t n) {
  return m.topRows(std::min<Eigen::Index>(Eigen::Index(n), m.rows()));
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig cfg;
  ObjectReader r(doc, "config");
  cfg.d = r.get<int>("d", 0);
  if (r.has("teacher")) {
    ObjectReader t(r.at("teacher"), "teacher");
    if (t.has("weights")) cfg.teacher_weights = to_vec(read_doubles(t.at("weights"), "teacher.weights"));
    if (t.has("features")) {
      const json& f = t.at("features");
      if (!f.is_array() || f.empty()) throw ConfigError("teacher.features must be a nonempty array");
      Mat feats(Eigen::Index(f.size()), Eigen::Index(f.at(0).size()));
      for (std::size_t i = 0; i < f.size(); ++i) {
        const std::vector<double> row = read_doubles(f.at(i), "teacher.features");
        if (Eigen::Index(row.size()) != feats.cols()) throw ConfigError("teacher.features rows differ in length");
        feats.row(Eigen::Index(i)) = to_vec(row).transpose();
      }
      cfg.teacher_features = std::move(feats);
    }
    t.finish();
  }
  cfg.teacher_file = r.get<std::string>("teacher_file", "");
  cfg.train_sizes = r.get<std::vector<std::int64_t>>("train_sizes", {});
  cfg.n_valid = r.get<std::int64_t>("n_valid", cfg.n_valid);
  cfg.n_test = r.get<std::int64_t>("n_test", cfg.n_test);
  cfg.n_test_f1sd = r.get<std::int64_t>("n_test_f1sd", cfg.n_test_f1sd);
  if (r.has("estimators")) {
    cfg.estimators.clear();
    for (const auto& s : r.at("estimators")) {
      cfg.estimators.push_back(as_config_error("estimators", [&] { return parse_estimator(s.get<std::string>()); }));
    }
  }
  if (r.has("regimes")) {
    cfg.regimes.clear();
    for (const auto& s : r.at("regimes")) {
      cfg.regimes.push_back(as_config_error("regimes", [&] { return parse_regime(s.get<std::string>()); }));
    }
  }
  for (Estimator e : {Estimator::kMle, Estimator::kKsd, Estimator::kF1sd}) cfg.step_size_grid[e] = {1.0};
  if (r.has("step_size_grid")) {
    const json& g = r.at("step_size_grid");
    if (g.is_array()) {
      const std::vector<double> grid = read_doubles(g, "step_size_grid");
      for (auto& [e, v] : cfg.step_size_grid) v = grid;
    } else {
      ObjectReader go(g, "step_size_grid");
      for (Estimator e : {Estimator::kMle, Estimator::kKsd, Estimator::kF1sd}) {
        const std::string key(to_string(e));
        if (go.has(key.c_str())) cfg.step_size_grid[e] = read_doubles(go.at(key.c_str()), "step_size_grid." + key);
      }
      go.finish();
    }
  }
  if (r.has("lambda_grid")) cfg.lambda_grid = read_doubles(r.at("lambda_grid"), "lambda_grid");
  cfg.n_seeds = r.get<int>("n_seeds", cfg.n_seeds);
  cfg.m = r.get<Eigen::Index>("m", cfg.m);
  cfg.n_iters = r.get<int>("n_iters", cfg.n_iters);
  cfg.base_seed = r.get<std::uint64_t>("base_seed", cfg.base_seed);
  cfg.output_dir = r.get<std::string>("output_dir", cfg.output_dir);
  cfg.init_weight_scale = r.get<double>("init_weight_scale", cfg.init_weight_scale);
  if (r.has("sampler")) {
    ObjectReader s(r.at("sampler"), "sampler");
    cfg.sampler.n_chains = s.get<int>("n_chains", cfg.sampler.n_chains);
    cfg.sampler.burn_in = s.get<int>("burn_in", cfg.sampler.burn_in);
    cfg.sampler.thinning = s.get<int>("thinning", cfg.sampler.thinning);
    cfg.sampler.max_steps = s.get<std::int64_t>("max_steps", cfg.sampler.max_steps);
    cfg.n_mc = s.get<std::int64_t>("n_mc", cfg.n_mc);
    s.finish();
  }
  if (r.has("kernel")) {
    ObjectReader k(r.at("kernel"), "kernel");
    const std::string kind = k.get<std::string>("kind", "RBF");
    if (kind != "RBF") throw ConfigError("kernel.kind must be RBF");
    cfg.kernel.sigma2 = k.get<double>("sigma2", cfg.kernel.sigma2);
    k.finish();
  }
  if (r.has("inner")) {
    ObjectReader in(r.at("inner"), "inner");
    cfg.inner.m_h = in.get<Eigen::Index>("m_h", cfg.inner.m_h);
    cfg.inner.steps = in.get<int>("steps", cfg.inner.steps);
    cfg.inner.step_size = in.get<double>("step_size", cfg.inner.step_size);
    cfg.inner.budget = in.get<double>("budget", cfg.inner.budget);
    cfg.inner.init_weight_scale = in.get<double>("init_weight_scale", cfg.inner.init_weight_scale);
    cfg.inner.warm_start = in.get<bool>("warm_start", cfg.inner.warm_start);
    cfg.inner.refresh_stride = in.get<int>("refresh_stride", cfg.inner.refresh_stride);
    in.finish();
  }
  if (r.has("min_search")) {
    ObjectReader ms(r.at("min_search"), "min_search");
    cfg.min_search.restarts = ms.get<int>("restarts", cfg.min_search.restarts);
    cfg.min_search.steps = ms.get<int>("steps", cfg.min_search.steps);
    cfg.min_search.step_size = ms.get<double>("step_size", cfg.min_search.step_size);
    cfg.min_search.decay = ms.get<double>("decay", cfg.min_search.decay);
    ms.finish();
  }
  if (r.has("eval")) {
    ObjectReader ev(r.at("eval"), "eval");
    cfg.grid_kl_points = ev.get<std::int64_t>("grid_kl_points", cfg.grid_kl_points);
    cfg.n_z = ev.get<std::int64_t>("n_z", cfg.n_z);
    ev.finish();
  }
  cfg.max_proposals = r.get<std::int64_t>("max_proposals", cfg.max_proposals);
  if (r.has("train")) {
    ObjectReader t(r.at("train"), "train");
    if (t.has("estimator")) {
      cfg.single.estimator = as_config_error("train.estimator", [&] { return parse_estimator(t.at("estimator").get<std::string>()); });
    }
    if (t.has("regime")) {
      cfg.single.regime = as_config_error("train.regime", [&] { return parse_regime(t.at("regime").get<std::string>()); });
    }
    if (t.has("step_size")) cfg.single.step_size = t.get<double>("step_size", 1.0);
    cfg.single.lambda = t.get<double>("lambda", cfg.single.lambda);
    cfg.single.seed = t.get<std::uint64_t>("seed", cfg.single.seed);
    cfg.single.n_train = t.get<std::int64_t>("n_train", cfg.single.n_train);
    t.finish();
  }
  if (r.has("sample")) {
    ObjectReader s(r.at("sample"), "sample");
    cfg.sample_seed_index = s.get<int>("seed_index", cfg.sample_seed_index);
    s.finish();
  }
  r.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  json doc;
  try {
    doc = read_json(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return from_json(doc);
}

void ExperimentConfig::validate() const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (!teacher_file.empty() && teacher_weights) {
    throw ConfigError("give either teacher or teacher_file, not both");
  }
  if (teacher_features && (!teacher_weights || teacher_features->rows() != teacher_weights->size())) {
    throw ConfigError("teacher.features needs one row per teacher weight");
  }
  for (std::size_t i = 0; i < train_sizes.size(); ++i) {
    if (train_sizes[i] < 1) throw ConfigError("train_sizes must be positive");
    if (i > 0 && train_sizes[i] <= train_sizes[i - 1]) {
      throw ConfigError("train_sizes must be strictly increasing");
    }
  }
  if (n_valid < 2 || n_test < 2 || n_test_f1sd < 1) throw ConfigError("split sizes too small");
  if (estimators.empty() || regimes.empty()) throw ConfigError("estimators and regimes must be nonempty");
  for (const auto& [e, grid] : step_size_grid) {
    if (grid.empty()) throw ConfigError("step_size_grid must be nonempty");
    for (double s : grid) {
      if (!(s > 0.0)) throw ConfigError("step sizes must be positive");
    }
  }
  if (lambda_grid.empty()) throw ConfigError("lambda_grid must be nonempty");
  for (double l : lambda_grid) {
    if (!(l >= 0.0)) throw ConfigError("lambda values must be nonnegative");
  }
  if (n_seeds < 1 || m < 1 || n_iters < 0) throw ConfigError("n_seeds, m must be >= 1 and n_iters >= 0");
  if (grid_kl_points < 2 || n_z < 1) throw ConfigError("eval sizes too small");
  as_config_error("sampler", [&] { sampler.validate(); return 0; });
  as_config_error("kernel", [&] { kernel.validate(); return 0; });
  as_config_error("inner", [&] { inner.validate(); return 0; });
}

TrainConfig ExperimentConfig::train_config(Estimator estimator, Regime regime, double step_size,
                                           double lambda, std::uint64_t seed) const {
  TrainConfig tc = TrainConfig::defaults(estimator, regime);
  tc.m = m;
  tc.step_size = step_size;
  tc.lambda = lambda;
  tc.n_iters = n_iters;
  tc.seed = seed;
  tc.init_weight_scale = init_weight_scale;
  if (tc.sampler) tc.sampler = sampler;
  tc.n_mc = n_mc;
  if (tc.kernel) tc.kernel = kernel;
  if (tc.inner) tc.inner = inner;
  return tc;
}

TeacherSpec resolve_teacher(const ExperimentConfig& cfg) {
  if (!cfg.teacher_file.empty()) {
    TeacherSpec t = teacher_from_json(read_json(cfg.teacher_file));
    if (t.sphere_dim() != cfg.d) throw ConfigError("teacher_file dimension differs from d");
    return t;
  }
  if (!cfg.teacher_weights) throw ConfigError("config needs a teacher or teacher_file");
  return as_config_error("teacher", [&] {
    if (cfg.teacher_features) {
      return TeacherSpec(cfg.d, *cfg.teacher_weights, *cfg.teacher_features);
    }
    Rng rng = derive_stream(cfg.base_seed, "teacher");
    return TeacherSpec::random(cfg.d, *cfg.teacher_weights, rng);
  });
}

double teacher_min(const ExperimentConfig& cfg, const TeacherSpec& teacher) {
  Rng rng = derive_stream(cfg.base_seed, "teacher-min");
  return estimate_min(teacher, cfg.min_search, rng);
}

DataSplits generate_splits(const ExperimentConfig& cfg, const TeacherSpec& teacher, double fmin,
                           int seed_index) {
  const std::int64_t n_train = cfg.train_sizes.empty() ? 0 : cfg.train_sizes.back();
  RejectionOptions opts;
  opts.max_proposals = cfg.max_proposals;
  const std::uint64_t s = std::uint64_t(seed_index);
  auto draw = [&](const char* purpose, std::int64_t n) {
    Rng rng = derive_stream(cfg.base_seed, purpose, {s});
    return stack(rejection_sample(teacher, fmin, n, rng, opts));
  };
  DataSplits out;
  out.train = n_train > 0 ? draw("data/train", n_train) : Mat(0, cfg.d + 1);
  out.valid = draw("data/valid", cfg.n_valid);
  out.test = draw("data/test", std::max(cfg.n_test, cfg.n_test_f1sd));
  return out;
}

std::vector<Metric> metrics_for(Estimator estimator) {
  switch (estimator) {
    case Estimator::kMle: return {Metric::kGridKl, Metric::kCrossEntropy};
    case Estimator::kKsd: return {Metric::kGridKl, Metric::kCrossEntropy, Metric::kTestKsd};
    case Estimator::kF1sd: return {Metric::kGridKl, Metric::kCrossEntropy, Metric::kTestF1sd};
  }
  return {};
}

namespace {

double evaluate_metric(Metric metric, const ParticleModel& model, const TeacherSpec& teacher,
                       const Mat& test, const ExperimentConfig& cfg, int seed_index) {
  const std::uint64_t s = std::uint64_t(seed_index);
  switch (metric) {
    case Metric::kGridKl: {
      Rng rng = derive_stream(cfg.base_seed, "eval/grid-kl", {s});
      return grid_kl(energy_fn(teacher), energy_fn(model), cfg.d, cfg.grid_kl_points, rng);
    }
    case Metric::kCrossEntropy: {
      Rng rng = derive_stream(cfg.base_seed, "eval/log-z", {s});
      return cross_entropy_test(model, first_rows(test, cfg.n_test), cfg.n_z, rng);
    }
    case Metric::kTestKsd:
      return ksd_unbiased(model, cfg.kernel, unstack(first_rows(test, cfg.n_test)));
    case Metric::kTestF1sd: {
      Rng rng = derive_stream(cfg.base_seed, "eval/f1sd", {s});
      return test_f1sd(model, unstack(first_rows(test, cfg.n_test_f1sd)), cfg.inner, rng);
    }
  }
  return std::nan("");
}

double validation_metric(Estimator estimator, const ParticleModel& model, const Mat& valid,
                         const ExperimentConfig& cfg, int seed_index) {
  const std::uint64_t s = std::uint64_t(seed_index);
  switch (estimator) {
    case Estimator::kMle: {
      Rng rng = derive_stream(cfg.base_seed, "valid/log-z", {s});
      return cross_entropy_test(model, valid, cfg.n_z, rng);
    }
    case Estimator::kKsd:
      return ksd_unbiased(model, cfg.kernel, unstack(valid));
    case Estimator::kF1sd: {
      Rng rng = derive_stream(cfg.base_seed, "valid/f1sd", {s});
      return test_f1sd(model, unstack(valid), cfg.inner, rng);
    }
  }
  return std::nan("");
}

std::string csv_value(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string("failed");
}

TeacherSpec teacher_for_run(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const fs::path saved = out_dir / "teacher.json";
  if (cfg.teacher_file.empty() && fs::exists(saved)) {
    TeacherSpec t = teacher_from_json(read_json(saved));
    if (t.sphere_dim() != cfg.d) throw ConfigError(saved.string() + " dimension differs from d");
    return t;
  }
  return resolve_teacher(cfg);
}

}  // namespace

std::string format_results(const std::vector<ResultRow>& rows) {
  std::string out = "estimator,regime,n_train,seed,metric,value,config_id\n";
  for (const ResultRow& r : rows) {
    out += r.estimator + ',' + r.regime + ',' + std::to_string(r.n_train) + ',' +
           std::to_string(r.seed) + ',' + r.metric + ',' + csv_value(r.value) + ',' +
           r.config_id + '\n';
  }
  return out;
}

std::vector<ResultRow> parse_results(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results CSV is empty");
  const std::string expected = "estimator,regime,n_train,seed,metric,value,config_id";
  if (line != expected) throw ConfigError("results CSV header must be '" + expected + "'");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw ConfigError("results CSV row has missing columns: " + line);
    ResultRow r;
    r.estimator = cells[0];
    r.regime = cells[1];
    r.n_train = std::stoll(cells[2]);
    r.seed = std::stoi(cells[3]);
    r.metric = cells[4];
    if (cells[5] != "failed") r.value = std::strtod(cells[5].c_str(), nullptr);
    r.config_id = cells[6];
    rows.push_back(std::move(r));
  }
  return rows;
}

fs::path cmd_teacher_gen(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const TeacherSpec teacher = resolve_teacher(cfg);
  const fs::path path = out_dir / "teacher.json";
  write_json(path, teacher_to_json(teacher));
  return path;
}

std::vector<fs::path> cmd_sample(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const TeacherSpec teacher = teacher_for_run(cfg, out_dir);
  const std::string hash = teacher_hash(teacher);
  const DataSplits splits = generate_splits(cfg, teacher, teacher_min(cfg, teacher), cfg.sample_seed_index);
  const fs::path dir = out_dir / "data";
  std::vector<fs::path> written = {dir / "train.csv", dir / "valid.csv", dir / "test.csv"};
  write_dataset(written[0], splits.train, hash);
  write_dataset(written[1], splits.valid, hash);
  write_dataset(written[2], splits.test, hash);
  return written;
}

std::vector<fs::path> cmd_train(const ExperimentConfig& cfg, const fs::path& out_dir) {
  Dataset ds = read_dataset(out_dir / "data" / "train.csv");
  if (ds.d != cfg.d) throw ConfigError("training data dimension differs from d");
  Mat data = cfg.single.n_train > 0 ? first_rows(ds.points, cfg.single.n_train) : ds.points;
  if (data.rows() == 0) throw ConfigError("training data is empty");
  const double step = cfg.single.step_size.value_or(cfg.step_size_grid.at(cfg.single.estimator).front());
  const TrainConfig tc = cfg.train_config(cfg.single.estimator, cfg.single.regime, step,
                                          cfg.single.lambda, cfg.single.seed);
  as_config_error("train", [&] {
    tc.validate();
    return 0;
  });
  const TrainResult result = train(tc, cfg.d, data);
  std::vector<fs::path> written = {out_dir / "model.json", out_dir / "trace.csv"};
  write_json(written[0], model_to_json(result.model, tc.lambda));
  write_text(written[1], format_trace(result.trace));
  return written;
}

fs::path cmd_evaluate(const ExperimentConfig& cfg, const fs::path& out_dir) {
  double lambda = 0.0;
  const ParticleModel model = model_from_json(read_json(out_dir / "model.json"), &lambda);
  if (model.sphere_dim() != cfg.d) throw ConfigError("checkpoint dimension differs from d");
  const TeacherSpec teacher = teacher_for_run(cfg, out_dir);
  const Dataset test = read_dataset(out_dir / "data" / "test.csv");
  std::string out = "metric,value,n_eval,seed\n";
  for (Metric metric : {Metric::kGridKl, Metric::kCrossEntropy, Metric::kTestKsd, Metric::kTestF1sd}) {
    MetricRecord rec;
    rec.metric = metric;
    rec.seed = std::uint64_t(cfg.sample_seed_index);
    rec.value = evaluate_metric(metric, model, teacher, test.points, cfg, cfg.sample_seed_index);
    switch (metric) {
      case Metric::kGridKl: rec.n_eval = cfg.grid_kl_points; break;
      case Metric::kCrossEntropy:
      case Metric::kTestKsd: rec.n_eval = std::min<std::int64_t>(cfg.n_test, test.points.rows()); break;
      case Metric::kTestF1sd: rec.n_eval = std::min<std::int64_t>(cfg.n_test_f1sd, test.points.rows()); break;
    }
    out += std::string(to_string(rec.metric)) + ',' + format_real(rec.value) + ',' +
           std::to_string(rec.n_eval) + ',' + std::to_string(rec.seed) + '\n';
  }
  const fs::path path = out_dir / "eval.csv";
  write_text(path, out);
  return path;
}

fs::path cmd_sweep(const ExperimentConfig& cfg, const fs::path& out_dir, int jobs) {
  if (cfg.train_sizes.empty()) throw ConfigError("sweep needs train_sizes");
  const TeacherSpec teacher = teacher_for_run(cfg, out_dir);
  const double fmin = teacher_min(cfg, teacher);

  std::vector<DataSplits> data(std::size_t(cfg.n_seeds));
  run_pool(data.size(), jobs, [&](std::size_t s) { data[s] = generate_splits(cfg, teacher, fmin, int(s)); });

  struct Cell {
    Estimator estimator;
    Regime regime;
    std::int64_t n_train;
    int seed;
  };
  struct Job {
    std::size_t cell;
    double step;
    double lambda;
  };
  std::vector<Cell> cells;
  std::vector<Job> job_list;
  for (Estimator e : cfg.estimators) {
    for (Regime r : cfg.regimes) {
      for (std::int64_t n : cfg.train_sizes) {
        for (int s = 0; s < cfg.n_seeds; ++s) {
          cells.push_back({e, r, n, s});
          for (double step : cfg.step_size_grid.at(e)) {
            for (double lambda : cfg.lambda_grid) job_list.push_back({cells.size() - 1, step, lambda});
          }
        }
      }
    }
  }

  struct JobResult {
    std::optional<ParticleModel> model;
    double validation = std::nan("");
  };
  std::vector<JobResult> results(job_list.size());
  run_pool(job_list.size(), jobs, [&](std::size_t j) {
    const Job& job = job_list[j];
    const Cell& cell = cells[job.cell];
    const std::string purpose =
        "train/" + std::string(to_string(cell.estimator)) + "/" + std::string(to_string(cell.regime));
    const std::uint64_t seed = derive_seed(
        cfg.base_seed, purpose,
        {std::uint64_t(cell.n_train), std::uint64_t(cell.seed), bits(job.step), bits(job.lambda)});
    const TrainConfig tc = cfg.train_config(cell.estimator, cell.regime, job.step, job.lambda, seed);
    const DataSplits& split = data[std::size_t(cell.seed)];
    try {
      TrainResult tr = train(tc, cfg.d, first_rows(split.train, cell.n_train));
      results[j].validation = validation_metric(cell.estimator, tr.model, split.valid, cfg, cell.seed);
      results[j].model = std::move(tr.model);
    } catch (const Error& e) {
      results[j].validation = std::nan("");
    }
  });

  // Per-cell selection, then test metrics for the selected model only.
  std::vector<std::vector<ResultRow>> cell_rows(cells.size());
  run_pool(cells.size(), jobs, [&](std::size_t c) {
    const Cell& cell = cells[c];
    std::vector<Candidate> candidates;
    std::vector<std::size_t> job_of;
    for (std::size_t j = 0; j < job_list.size(); ++j) {
      if (job_list[j].cell != c || !results[j].model) continue;
      candidates.push_back({{job_list[j].step, job_list[j].lambda, std::uint64_t(cell.seed)},
                            *results[j].model,
                            results[j].validation});
      job_of.push_back(j);
    }
    std::optional<Selection> sel;
    if (!candidates.empty()) {
      try {
        sel = validation_select(candidates);
      } catch (const SelectionError&) {
      }
    }
    for (Metric metric : metrics_for(cell.estimator)) {
      ResultRow row{std::string(to_string(cell.estimator)), std::string(to_string(cell.regime)),
                    cell.n_train, cell.seed, std::string(to_string(metric)), std::nullopt, "failed"};
      if (sel) {
        row.config_id = config_id(sel->config.step_size, sel->config.lambda);
        try {
          const double v = evaluate_metric(metric, sel->model, teacher, data[std::size_t(cell.seed)].test,
                                           cfg, cell.seed);
          if (std::isfinite(v)) row.value = v;
        } catch (const Error&) {
        }
      }
      cell_rows[c].push_back(std::move(row));
    }
  });

  std::vector<ResultRow> rows;
  for (auto& cr : cell_rows) rows.insert(rows.end(), cr.begin(), cr.end());
  const fs::path path = out_dir / "results.csv";
  write_text(path, format_results(rows));

  // Teacher metrics on the same test sets, for reference lines.
  std::set<Metric> ref_metrics;
  for (Estimator e : cfg.estimators) {
    for (Metric m : metrics_for(e)) {
      if (m != Metric::kGridKl) ref_metrics.insert(m);
    }
  }
  std::vector<std::string> ref_lines(std::size_t(cfg.n_seeds));
  const ParticleModel teacher_model = teacher.as_model();
  run_pool(ref_lines.size(), jobs, [&](std::size_t s) {
    for (Metric m : ref_metrics) {
      const double v = evaluate_metric(m, teacher_model, teacher, data[s].test, cfg, int(s));
      ref_lines[s] += std::to_string(s) + ',' + std::string(to_string(m)) + ',' + format_real(v) + '\n';
    }
  });
  std::string ref = "seed,metric,value\n";
  for (const std::string& l : ref_lines) ref += l;
  write_text(out_dir / "teacher_reference.csv", ref);
  return path;
}

}  // namespace ebm
