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
#ifndef EBM_IO_H_
#define EBM_IO_H_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ebm/stein.h"
#include "ebm/teacher.h"
#include "ebm/train.h"

namespace ebm {

inline constexpr int kSchemaVersion = 1;

// Checkpoint document:
//   {schema_version, kind: "model", d, m, regime, lambda, weights: [m],
//    features: [[d+1] x m]}
// Doubles are written in shortest round-trip form, so reading back is
// bit-exact.
nlohmann::json model_to_json(const ParticleModel& model, double lambda);
ParticleModel model_from_json(const nlohmann::json& doc, double* lambda = nullptr);

// {schema_version, kind: "teacher", d, J, weights, features}
nlohmann::json teacher_to_json(const TeacherSpec& teacher);
TeacherSpec teacher_from_json(const nlohmann::json& doc);
// 16 hex digits of fnv1a64 over the compact teacher document.
std::string teacher_hash(const TeacherSpec& teacher);

// {schema_version, kind: "stein_test_function", budget, components: [model...]}
nlohmann::json test_function_to_json(const SteinTestFunction& h);
SteinTestFunction test_function_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Dataset CSV: "# d=<d> n=<n> teacher=<hash>" then one sample per row with
// d+1 values at 17 significant digits.
struct Dataset {
  int d = 0;
  Mat points;
  std::string teacher_hash;
};
std::string format_dataset(const Mat& points, const std::string& teacher_hash);
void write_dataset(const std::filesystem::path& path, const Mat& points,
                   const std::string& teacher_hash);
Dataset read_dataset(const std::filesystem::path& path);

// iter,objective,grad_norm,acceptance_rate,wall_time_ms
std::string format_trace(const TrainTrace& trace);

// printf("%.17g").
std::string format_real(double value);

}  // namespace ebm

#endif  // EBM_IO_H_
