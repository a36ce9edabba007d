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
#include <filesystem>

#include <gtest/gtest.h>

#include "ebm/errors.h"
#include "test_util.h"

namespace ebm {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / "ebm_io_test" / name;
  fs::remove_all(p);
  return p;
}

TEST(ModelJsonTest, RoundTripIsBitExact) {
  Rng rng = derive_stream(1, "test");
  for (Regime r : {Regime::kF1, Regime::kF2}) {
    const ParticleModel model = testing::random_model(rng, 4, 9, r);
    double lambda = 0.0;
    const nlohmann::json doc = model_to_json(model, 0.125);
    EXPECT_EQ(model_from_json(nlohmann::json::parse(doc.dump()), &lambda), model);
    EXPECT_EQ(lambda, 0.125);
    EXPECT_EQ(doc.at("kind"), "model");
    EXPECT_EQ(doc.at("schema_version"), kSchemaVersion);
  }
}

TEST(ModelJsonTest, MalformedDocumentsAreConfigErrors) {
  Rng rng = derive_stream(2, "test");
  nlohmann::json doc = model_to_json(testing::random_model(rng, 2, 3), 0.0);
  nlohmann::json bad = doc;
  bad["schema_version"] = 99;
  EXPECT_THROW(model_from_json(bad), ConfigError);
  bad = doc;
  bad.erase("weights");
  EXPECT_THROW(model_from_json(bad), ConfigError);
  bad = doc;
  bad["m"] = 4;
  EXPECT_THROW(model_from_json(bad), ConfigError);
  bad = doc;
  bad["kind"] = "teacher";
  EXPECT_THROW(model_from_json(bad), ConfigError);
}

TEST(TeacherJsonTest, RoundTripAndHash) {
  Rng rng = derive_stream(3, "test");
  const TeacherSpec t = TeacherSpec::random(5, Vec::Constant(2, -5.0), rng);
  EXPECT_EQ(teacher_from_json(nlohmann::json::parse(teacher_to_json(t).dump())), t);
  const std::string h = teacher_hash(t);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(h, teacher_hash(t));
  EXPECT_NE(h, teacher_hash(TeacherSpec::random(5, Vec::Constant(2, -5.0), rng)));
}

TEST(TestFunctionJsonTest, RoundTrip) {
  Rng rng = derive_stream(4, "test");
  const SteinTestFunction h = SteinTestFunction::random(3, 6, 0.7, 1.0, rng);
  EXPECT_EQ(test_function_from_json(nlohmann::json::parse(test_function_to_json(h).dump())), h);
}

TEST(DatasetTest, RoundTripIsBitExact) {
  Rng rng = derive_stream(5, "test");
  const Mat pts = uniform_samples(rng, 3, 25);
  const fs::path path = temp_dir("roundtrip") / "data.csv";
  write_dataset(path, pts, "00112233aabbccdd");
  const Dataset ds = read_dataset(path);
  EXPECT_EQ(ds.d, 3);
  EXPECT_EQ(ds.points, pts);
  EXPECT_EQ(ds.teacher_hash, "00112233aabbccdd");
  EXPECT_EQ(format_dataset(pts, "x").substr(0, 18), "# d=3 n=25 teacher");
}

TEST(DatasetTest, RejectsBadFiles) {
  const fs::path dir = temp_dir("bad");
  write_text(dir / "norm.csv", "# d=1 n=1 teacher=ab\n1,1\n");
  EXPECT_THROW(read_dataset(dir / "norm.csv"), Error);
  write_text(dir / "header.csv", "1,0\n");
  EXPECT_THROW(read_dataset(dir / "header.csv"), Error);
  write_text(dir / "count.csv", "# d=1 n=2 teacher=ab\n1,0\n");
  EXPECT_THROW(read_dataset(dir / "count.csv"), Error);
  EXPECT_THROW(read_dataset(dir / "missing.csv"), IoError);
}

TEST(TraceTest, FormatsRowsAndBlankAcceptance) {
  TrainTrace trace;
  trace.records.push_back({0, 1.5, 0.25, std::nan(""), 3.0});
  trace.records.push_back({1, -0.5, 0.125, 0.75, 4.0});
  EXPECT_EQ(format_trace(trace),
            "iter,objective,grad_norm,acceptance_rate,wall_time_ms\n"
            "0,1.5,0.25,,3\n"
            "1,-0.5,0.125,0.75,4\n");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

}  // namespace
}  // namespace ebm
