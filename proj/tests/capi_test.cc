// Copyright 2026 The ilcrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exercises the shared library strictly through its C header.
#include "ilcrace/ilcrace.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp(const std::string& name) {
  return (fs::path(testing::TempDir()) / ("capi_" + name)).string();
}

constexpr const char* kSmallLinear = R"({"format_version": 1,
  "plant": "linear", "laps": 3, "max_samples": 150, "accel_levels": [4, 8],
  "learner": {"type": "qilc", "T": 1, "R": 1, "S": 100}})";

TEST(CApiTest, NullArgumentsAreRejected) {
  EXPECT_EQ(ilc_config_default(nullptr), ILC_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(ilc_last_error()).find("out"), std::string::npos);
  ilc_config* config = nullptr;
  EXPECT_EQ(ilc_config_parse(nullptr, &config), ILC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ilc_study_run(nullptr, nullptr), ILC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ilc_sweep_run(nullptr, nullptr), ILC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ilc_generate_track(nullptr), ILC_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ilc_study_levels(nullptr), 0u);
  EXPECT_EQ(ilc_sweep_cells(nullptr), 0u);
  EXPECT_TRUE(std::isnan(ilc_config_level(nullptr, 0)));
  ilc_config_free(nullptr);
  ilc_study_free(nullptr);
  ilc_sweep_free(nullptr);
}

TEST(CApiTest, DefaultConfig) {
  ilc_config* config = nullptr;
  ASSERT_EQ(ilc_config_default(&config), ILC_OK);
  ASSERT_EQ(ilc_config_levels(config), 1u);
  EXPECT_EQ(ilc_config_level(config, 0), 8.0);
  const char* json = nullptr;
  ASSERT_EQ(ilc_config_json(config, &json), ILC_OK);
  EXPECT_NE(std::string(json).find("\"seed\": 20120627"), std::string::npos);
  EXPECT_EQ(ilc_config_set_seed(config, 5), ILC_OK);
  ASSERT_EQ(ilc_config_json(config, &json), ILC_OK);
  EXPECT_NE(std::string(json).find("\"seed\": 5"), std::string::npos);
  EXPECT_EQ(ilc_config_set_stop_after(config, -1), ILC_ERR_CONFIG);
  ilc_config_free(config);
  EXPECT_STRNE(ilc_version(), "");
}

TEST(CApiTest, ConfigErrorsCarryMessages) {
  ilc_config* config = nullptr;
  EXPECT_EQ(ilc_config_parse("{\"format_version\": 1, \"laps\": 0}", &config),
            ILC_ERR_CONFIG);
  EXPECT_EQ(config, nullptr);
  EXPECT_NE(std::string(ilc_last_error()).find("laps"), std::string::npos);
  const std::string missing = tmp("missing.json");
  EXPECT_EQ(ilc_config_load(missing.c_str(), &config), ILC_ERR_CONFIG);
  EXPECT_NE(std::string(ilc_last_error()).find(missing), std::string::npos);
}

TEST(CApiTest, StudyRunAndExport) {
  ilc_config* config = nullptr;
  ASSERT_EQ(ilc_config_parse(kSmallLinear, &config), ILC_OK);
  ilc_study* study = nullptr;
  ASSERT_EQ(ilc_study_run(config, &study), ILC_OK) << ilc_last_error();
  ASSERT_EQ(ilc_study_levels(study), 2u);

  double accel = 0, gamma = 0, wall = 0;
  size_t laps = 0, samples = 0;
  ASSERT_EQ(ilc_study_level_info(study, 1, &accel, &laps, &samples, &gamma, &wall), ILC_OK);
  EXPECT_EQ(accel, 8.0);
  EXPECT_EQ(laps, 3u);
  EXPECT_EQ(samples, 150u);
  EXPECT_LT(gamma, 1.0);
  EXPECT_GE(wall, 0.0);

  std::vector<double> rms(3);
  EXPECT_EQ(ilc_study_rms(study, 1, rms.data(), 2), ILC_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(ilc_study_rms(study, 1, rms.data(), rms.size()), ILC_OK);
  EXPECT_LT(rms[2], rms[0]);
  EXPECT_EQ(ilc_study_rms(study, 2, rms.data(), rms.size()), ILC_ERR_INVALID_ARGUMENT);

  const std::string csv = tmp("study.csv"), json = tmp("study.json");
  ASSERT_EQ(ilc_study_export(study, 0, csv.c_str(), ILC_FORMAT_CSV), ILC_OK);
  ASSERT_EQ(ilc_study_export(study, 0, json.c_str(), ILC_FORMAT_JSON), ILC_OK);
  const std::string text = slurp(csv);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 3 * 150);
  EXPECT_NE(slurp(json).find("\"rms_by_lap\""), std::string::npos);
  EXPECT_EQ(ilc_study_export(study, 0, csv.c_str(), static_cast<ilc_format>(7)),
            ILC_ERR_INVALID_ARGUMENT);
  const std::string bad = tmp("nodir") + "/deeper/out.csv";
  EXPECT_EQ(ilc_study_export(study, 0, bad.c_str(), ILC_FORMAT_CSV), ILC_ERR_IO);

  const std::string learned = tmp("learned.csv");
  ASSERT_EQ(ilc_study_export_learned(study, 0, learned.c_str()), ILC_OK);
  EXPECT_EQ(slurp(learned).substr(0, 18), "k,s_m,delta_L_rad\n");

  ilc_study_free(study);
  ilc_config_free(config);
}

TEST(CApiTest, DivergenceStatus) {
  ilc_config* config = nullptr;
  ASSERT_EQ(ilc_config_parse(R"({"format_version": 1, "plant": "linear",
    "laps": 30, "max_samples": 300,
    "learner": {"type": "pd", "kp": 5.0, "kd": 5.0, "cutoff_hz": null}})",
                             &config),
            ILC_OK);
  ilc_study* study = nullptr;
  EXPECT_EQ(ilc_study_run(config, &study), ILC_ERR_DIVERGENCE);
  EXPECT_EQ(study, nullptr);
  EXPECT_NE(std::string(ilc_last_error()).find("lap"), std::string::npos);
  ilc_config_free(config);
}

TEST(CApiTest, Sweep) {
  ilc_sweep_params p;
  ilc_sweep_params_default(&p);
  EXPECT_EQ(p.kp_count, 51u);
  EXPECT_EQ(p.kd_count, 51u);
  EXPECT_EQ(p.window, 400u);
  EXPECT_EQ(p.filter_hz, 2.0);
  p.kp_count = 3;
  p.kd_count = 2;
  p.window = 60;
  p.filter_enabled = 0;
  ilc_sweep* sweep = nullptr;
  ASSERT_EQ(ilc_sweep_run(&p, &sweep), ILC_OK) << ilc_last_error();
  ASSERT_EQ(ilc_sweep_cells(sweep), 6u);
  EXPECT_EQ(ilc_sweep_samples(sweep), 60u);
  double kp = -1, kd = -1, gamma = -1;
  int stable = -1;
  ASSERT_EQ(ilc_sweep_cell(sweep, 0, &kp, &kd, &gamma, &stable), ILC_OK);
  EXPECT_EQ(kp, 0.0);
  EXPECT_EQ(kd, 0.0);
  EXPECT_NEAR(gamma, 1.0, 1e-12);
  EXPECT_EQ(stable, 0);
  EXPECT_EQ(ilc_sweep_cell(sweep, 6, &kp, &kd, &gamma, &stable), ILC_ERR_INVALID_ARGUMENT);
  const std::string out = tmp("sweep.csv");
  ASSERT_EQ(ilc_sweep_export(sweep, out.c_str()), ILC_OK);
  const std::string text = slurp(out);
  EXPECT_EQ(text.substr(0, text.find('\n')), "kp,kd,gamma,stable");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  ilc_sweep_free(sweep);

  p.kp_count = 0;
  EXPECT_EQ(ilc_sweep_run(&p, &sweep), ILC_ERR_INVALID_ARGUMENT);
}

TEST(CApiTest, SynthesizeAndExportLifted) {
  ilc_config* config = nullptr;
  ASSERT_EQ(ilc_config_parse(R"({"format_version": 1, "max_samples": 40,
    "learner": {"type": "deadbeat"}})", &config), ILC_OK);
  const std::string q = tmp("Q.csv"), l = tmp("L.csv"), p = tmp("P.csv");
  size_t samples = 0;
  double gamma = -1;
  ASSERT_EQ(ilc_synthesize(config, 8.0, q.c_str(), l.c_str(), &samples, &gamma), ILC_OK)
      << ilc_last_error();
  EXPECT_EQ(samples, 40u);
  EXPECT_LE(gamma, 1e-9);
  EXPECT_FALSE(slurp(q).empty());
  EXPECT_FALSE(slurp(l).empty());
  ASSERT_EQ(ilc_export_lifted(config, 8.0, p.c_str(), &samples), ILC_OK);
  const std::string text = slurp(p);
  EXPECT_EQ(text.substr(0, text.find('\n')), "# N=40 Ts=0.1");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 41);
  EXPECT_EQ(ilc_synthesize(config, -1.0, q.c_str(), l.c_str(), &samples, &gamma),
            ILC_ERR_VALIDATION);
  ilc_config_free(config);
}

TEST(CApiTest, GenerateTrackMatchesBundledFile) {
  const std::string out = tmp("track.csv");
  ASSERT_EQ(ilc_generate_track(out.c_str()), ILC_OK);
  EXPECT_EQ(slurp(out), slurp(fs::path(ILCRACE_DATA_DIR) / "synthetic_track.csv"));
  const std::string bad = tmp("nodir") + "/deeper/track.csv";
  EXPECT_EQ(ilc_generate_track(bad.c_str()), ILC_ERR_IO);
  EXPECT_NE(std::string(ilc_last_error()).find(bad), std::string::npos);
}

}  // namespace
