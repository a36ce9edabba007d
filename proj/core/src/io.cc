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
#include "ebm/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ebm/errors.h"

namespace ebm {

using nlohmann::json;

namespace {

json matrix_rows(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_values(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

const json& field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) {
    throw ConfigError(std::string("missing field '") + key + "'");
  }
  return doc.at(key);
}

void expect_kind(const json& doc, const char* kind) {
  const int version = field(doc, "schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(version));
  }
  if (doc.contains("kind") && doc.at("kind").get<std::string>() != kind) {
    throw ConfigError(std::string("expected a '") + kind + "' document");
  }
}

Vec read_vector(const json& arr, Eigen::Index expected, const char* what) {
  if (!arr.is_array() || Eigen::Index(arr.size()) != expected) {
    throw ConfigError(std::string(what) + " has the wrong length");
  }
  Vec out(expected);
  for (Eigen::Index i = 0; i < expected; ++i) out[i] = arr.at(std::size_t(i)).get<double>();
  return out;
}

Mat read_matrix(const json& arr, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!arr.is_array() || Eigen::Index(arr.size()) != rows) {
    throw ConfigError(std::string(what) + " has the wrong number of rows");
  }
  Mat out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) out.row(i) = read_vector(arr.at(std::size_t(i)), cols, what).transpose();
  return out;
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

json model_to_json(const ParticleModel& model, double lambda) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "model"},
              {"d", model.sphere_dim()},
              {"m", model.size()},
              {"regime", std::string(to_string(model.regime()))},
              {"lambda", lambda},
              {"weights", vector_values(model.weights())},
              {"features", matrix_rows(model.features())}};
}

ParticleModel model_from_json(const json& doc, double* lambda) {
  try {
    expect_kind(doc, "model");
    const int d = field(doc, "d").get<int>();
    const Eigen::Index m = field(doc, "m").get<Eigen::Index>();
    const Regime regime = parse_regime(field(doc, "regime").get<std::string>());
    if (lambda != nullptr) *lambda = doc.value("lambda", 0.0);
    return ParticleModel(d, read_vector(field(doc, "weights"), m, "weights"),
                         read_matrix(field(doc, "features"), m, d + 1, "features"), regime);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model document: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid model document: ") + e.what());
  }
}

json teacher_to_json(const TeacherSpec& teacher) {
  return json{{"schema_version", kSchemaVersion},
              {"kind", "teacher"},
              {"d", teacher.sphere_dim()},
              {"J", teacher.size()},
              {"weights", vector_values(teacher.weights())},
              {"features", matrix_rows(teacher.features())}};
}

TeacherSpec teacher_from_json(const json& doc) {
  try {
    expect_kind(doc, "teacher");
    const int d = field(doc, "d").get<int>();
    const Eigen::Index j = field(doc, "J").get<Eigen::Index>();
    return TeacherSpec(d, read_vector(field(doc, "weights"), j, "weights"),
                       read_matrix(field(doc, "features"), j, d + 1, "features"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed teacher document: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid teacher document: ") + e.what());
  }
}

std::string teacher_hash(const TeacherSpec& teacher) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(teacher_to_json(teacher).dump())));
  return buf;
}

json test_function_to_json(const SteinTestFunction& h) {
  json comps = json::array();
  for (const ParticleModel& c : h.components()) comps.push_back(model_to_json(c, 0.0));
  return json{{"schema_version", kSchemaVersion},
              {"kind", "stein_test_function"},
              {"budget", h.budget()},
              {"components", std::move(comps)}};
}

SteinTestFunction test_function_from_json(const json& doc) {
  try {
    expect_kind(doc, "stein_test_function");
    std::vector<ParticleModel> comps;
    for (const json& c : field(doc, "components")) comps.push_back(model_from_json(c));
    return SteinTestFunction(std::move(comps), field(doc, "budget").get<double>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed test function document: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid test function document: ") + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string format_dataset(const Mat& points, const std::string& hash) {
  std::string out = "# d=" + std::to_string(points.cols() - 1) + " n=" +
                    std::to_string(points.rows()) + " teacher=" + hash + "\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_real(points(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const Mat& points,
                   const std::string& hash) {
  write_text(path, format_dataset(points, hash));
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0) {
    throw ConfigError(path.string() + ": missing dataset header");
  }
  Dataset ds;
  long long n = -1;
  char hash[64] = {0};
  if (std::sscanf(header.c_str(), "# d=%d n=%lld teacher=%63s", &ds.d, &n, hash) != 3 ||
      ds.d < 1 || n < 0) {
    throw ConfigError(path.string() + ": malformed dataset header '" + header + "'");
  }
  ds.teacher_hash = hash;
  ds.points.resize(n, ds.d + 1);
  std::string line;
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ConfigError(path.string() + ": truncated dataset");
    std::istringstream row(line);
    std::string cell;
    for (int j = 0; j <= ds.d; ++j) {
      if (!std::getline(row, cell, ',')) {
        throw ConfigError(path.string() + ": short row " + std::to_string(i));
      }
      ds.points(i, j) = std::strtod(cell.c_str(), nullptr);
    }
    const double norm = ds.points.row(i).norm();
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
      throw ConfigError(path.string() + ": row " + std::to_string(i) + " is not unit norm");
    }
  }
  return ds;
}

std::string format_trace(const TrainTrace& trace) {
  std::string out = "iter,objective,grad_norm,acceptance_rate,wall_time_ms\n";
  for (const TrainRecord& r : trace.records) {
    out += std::to_string(r.iter) + ',' + format_real(r.objective) + ',' +
           format_real(r.grad_norm) + ',' +
           (std::isnan(r.acceptance_rate) ? std::string() : format_real(r.acceptance_rate)) +
           ',' + format_real(r.wall_time_ms) + '\n';
  }
  return out;
}

}  // namespace ebm
