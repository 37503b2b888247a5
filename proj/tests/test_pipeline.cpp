// Copyright 2026 The lowlight-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lowlight/errors.hpp"
#include "lowlight/io.hpp"
#include "lowlight/pipeline.hpp"
#include "test_util.hpp"

using namespace lowlight;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = LOWLIGHT_TEST_DATA "/corpus";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Copies the first n accepted scenes (plus their sidecars) into dir.
void small_corpus(const fs::path& dir, int n) {
  fs::create_directories(dir);
  for (int i = 0; i < n; ++i) {
    const std::string name = "scene_" + std::to_string(100 + 2 * i).substr(1);
    fs::copy_file(kCorpus / (name + ".png"), dir / (name + ".png"));
    if (fs::exists(kCorpus / (name + ".txt"))) fs::copy_file(kCorpus / (name + ".txt"), dir / (name + ".txt"));
  }
}

PipelineConfig config_for(const fs::path& in, const fs::path& out, int workers = 1) {
  PipelineConfig cfg;
  cfg.input_dir = in;
  cfg.output_dir = out;
  cfg.master_seed = 42;
  cfg.workers = workers;
  return cfg;
}

std::size_t count_for(const VerificationReport& r, const std::string& source, const std::string& needle) {
  std::size_t n = 0;
  for (const auto& v : r.violations) {
    if (v.source_path == source && v.message.find(needle) != std::string::npos) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("record seeds hash the master seed and path") {
  CHECK(record_seed(1, "a.png") == record_seed(1, "a.png"));
  CHECK(record_seed(1, "a.png") != record_seed(2, "a.png"));
  CHECK(record_seed(1, "a.png") != record_seed(1, "b.png"));
  CHECK(record_seed(1, "dir/a.png") != record_seed(1, "a.png"));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(record_seed(7, "img_" + std::to_string(i) + ".png"));
  CHECK(seen.size() == 1000);
}

TEST_CASE("pipeline config json") {
  const auto j = nlohmann::json::parse(R"({
    "input_dir": "in", "output_dir": "out", "master_seed": 9, "workers": 3,
    "selection": {"color_thresh": 500, "exposure_rule": "and"},
    "noise": {"sigma_g_max": 0.05, "bayer_pattern": "GRBG"},
    "fusion": {"stack_size": 4}, "emit_maps": false, "output_depth": 16
  })");
  const PipelineConfig cfg = pipeline_config_from_json(j);
  CHECK(cfg.master_seed == 9);
  CHECK(cfg.workers == 3);
  CHECK(cfg.selection.color_thresh == 500);
  CHECK(cfg.selection.exposure_rule == ExposureRule::kMeanAndVariance);
  CHECK(cfg.noise.sigma_g_max == 0.05);
  CHECK(cfg.noise.pattern == BayerPattern::kGRBG);
  CHECK(cfg.fusion.stack_size == 4);
  CHECK_FALSE(cfg.emit_maps);
  CHECK(cfg.emit_high_contrast);
  CHECK(cfg.output_depth == 16);

  const auto snap = config_snapshot(cfg);
  CHECK_FALSE(snap.contains("workers"));
  CHECK_FALSE(snap.contains("output_dir"));
  CHECK(selection_config_from_json(snap.at("selection")).color_thresh == 500);
  CHECK(fusion_config_from_json(snap.at("fusion")).stack_size == 4);

  CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"selection": {"blur": 1}})")), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"workers": "many"})")), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"noise": {"crf": "linear"}})")), ConfigError);

  PipelineConfig bad = config_for("a", "b");
  bad.workers = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(config_for("same", "same").validate(), ConfigError);
}

TEST_CASE("workers environment variable") {
  ::setenv(kWorkersEnvVar, "6", 1);
  CHECK(workers_from_env() == 6);
  ::setenv(kWorkersEnvVar, "zero", 1);
  CHECK_THROWS_AS(workers_from_env(), ConfigError);
  ::setenv(kWorkersEnvVar, "0", 1);
  CHECK_THROWS_AS(workers_from_env(), ConfigError);
  ::unsetenv(kWorkersEnvVar);
  CHECK_FALSE(workers_from_env().has_value());
}

TEST_CASE("build, verify and fault injection") {
  testutil::TempDir tmp("pipeline");
  small_corpus(tmp / "in", 5);
  const PipelineConfig cfg = config_for(tmp / "in", tmp / "out");
  const DatasetManifest m = build_dataset(cfg);
  CHECK(m.records.size() == 5);
  CHECK(m.scanned == 5);
  CHECK(m.selected == 5);
  CHECK(m.failed == 0);
  CHECK(fs::exists(tmp / "out" / "manifest.json"));
  for (const auto& r : m.records) {
    REQUIRE(r.selected);
    for (const auto* p : {&r.dark, &r.dark_noisy, &r.attention_map, &r.noise_map, &r.high_contrast}) {
      REQUIRE(p->has_value());
      CHECK(fs::exists(tmp / "out" / **p));
    }
    CHECK(r.record_seed == record_seed(42, r.source_path));
    CHECK(r.sim_params->in_sampling_range());
  }
  CHECK(m.records[0].sidecars == std::vector<std::string>{"sidecars/scene_00.txt"});
  CHECK(slurp(tmp / "out" / "sidecars" / "scene_00.txt") == slurp(kCorpus / "scene_00.txt"));

  // Manifest file round trip.
  const DatasetManifest loaded = load_manifest(tmp / "out" / "manifest.json");
  CHECK(to_json(loaded) == to_json(m));

  SUBCASE("fresh dataset verifies clean") {
    const VerificationReport r = verify_dataset(loaded, tmp / "out");
    CHECK(r.ok());
    CHECK(r.records_checked == 5);
    CHECK(r.reproductions_checked == 1);
  }
  SUBCASE("truncated map is one violation") {
    const fs::path map = tmp / "out" / *m.records[2].attention_map;
    fs::resize_file(map, fs::file_size(map) / 2);
    const VerificationReport r = verify_dataset(loaded, tmp / "out");
    CHECK(r.violations.size() == 1);
    CHECK(r.violations[0].path == *m.records[2].attention_map);
  }
  SUBCASE("brightened dark image fails the attention recheck") {
    const auto& rec = m.records[3];
    ImageRGB dark = load_image(tmp / "out" / *rec.dark);
    for (int c = 0; c < 3; ++c) {
      for (double& v : dark.channel(c).samples()) v = std::min(1.0, v * 2.0);
    }
    save_image(dark, tmp / "out" / *rec.dark, 8);
    const VerificationReport r = verify_dataset(loaded, tmp / "out");
    CHECK(count_for(r, rec.source_path, "attention map recheck") == 1);
    for (const auto& v : r.violations) CHECK(v.source_path == rec.source_path);
  }
  SUBCASE("stray and missing files break closure") {
    std::ofstream(tmp / "out" / "dark" / "stray.png") << "x";
    fs::remove(tmp / "out" / *m.records[1].high_contrast);
    const VerificationReport r = verify_dataset(loaded, tmp / "out");
    std::size_t stray = 0, missing = 0;
    for (const auto& v : r.violations) {
      if (v.path == "dark/stray.png") ++stray;
      if (v.path == *m.records[1].high_contrast && v.message.find("missing") != std::string::npos) ++missing;
    }
    CHECK(stray == 1);
    CHECK(missing == 1);
  }
  SUBCASE("tampered parameters are caught by reproduction") {
    DatasetManifest tampered = loaded;
    tampered.records[0].sim_params->gamma += 0.1;
    const VerificationReport r = verify_dataset(tampered, tmp / "out");
    CHECK(count_for(r, tampered.records[0].source_path, "reproduce") >= 1);
  }
  SUBCASE("unselected record with outputs is a violation") {
    DatasetManifest tampered = loaded;
    tampered.records[4].selected = false;
    tampered.selected = 4;
    const VerificationReport r = verify_dataset(tampered, tmp / "out");
    CHECK(count_for(r, tampered.records[4].source_path, "unselected") == 1);
  }
  SUBCASE("non-empty output directory needs overwrite") {
    CHECK_THROWS_AS(build_dataset(cfg), ConfigError);
    PipelineConfig again = cfg;
    again.overwrite = true;
    const DatasetManifest m2 = build_dataset(again);
    CHECK(to_json(m2) == to_json(m));
    CHECK(verify_dataset(m2, tmp / "out").ok());
  }
}

TEST_CASE("builds are reproducible and order independent") {
  testutil::TempDir tmp("repro");
  small_corpus(tmp / "in", 3);
  const DatasetManifest a = build_dataset(config_for(tmp / "in", tmp / "a", 1));
  const DatasetManifest b = build_dataset(config_for(tmp / "in", tmp / "b", 3));
  CHECK(slurp(tmp / "a" / "manifest.json") == slurp(tmp / "b" / "manifest.json"));
  CHECK(slurp(tmp / "a" / *a.records[1].dark_noisy) == slurp(tmp / "b" / *b.records[1].dark_noisy));

  // Adding a file leaves the other records' randomness untouched.
  fs::copy_file(kCorpus / "scene_10.png", tmp / "in" / "aaa_first.png");
  const DatasetManifest c = build_dataset(config_for(tmp / "in", tmp / "c", 1));
  REQUIRE(c.records.size() == 4);
  CHECK(c.records[0].source_path == "aaa_first.png");
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(c.records[i + 1].record_seed == a.records[i].record_seed);
    CHECK(c.records[i + 1].noise_params->seed == a.records[i].noise_params->seed);
  }
}

TEST_CASE("per-image failures are isolated") {
  testutil::TempDir tmp("isolate");
  small_corpus(tmp / "in", 2);
  std::ofstream(tmp / "in" / "broken.png") << "definitely not a png";
  fs::copy_file(kCorpus / "reject_dark.png", tmp / "in" / "reject_dark.png");
  // Same stem as an existing image: the later one collides.
  fs::copy_file(kCorpus / "scene_00.png", tmp / "in" / "scene_00.jpg");
  const DatasetManifest m = build_dataset(config_for(tmp / "in", tmp / "out"));
  CHECK(m.records.size() == 5);
  CHECK(m.failed == 2);
  CHECK(m.selected == 2);
  for (const auto& r : m.records) {
    if (r.source_path == "broken.png" || r.source_path == "scene_00.png") {
      CHECK(r.error.has_value());
      CHECK_FALSE(r.selected);
      CHECK_FALSE(r.dark.has_value());
    }
    if (r.source_path == "reject_dark.png") {
      CHECK_FALSE(r.selected);
      CHECK_FALSE(r.error.has_value());
      REQUIRE(r.selection.has_value());
      CHECK_FALSE(r.selection->darkness_pass);
    }
  }
  CHECK(verify_dataset(m, tmp / "out").ok());
}

TEST_CASE("optional outputs") {
  testutil::TempDir tmp("optional");
  small_corpus(tmp / "in", 1);
  PipelineConfig cfg = config_for(tmp / "in", tmp / "out");
  cfg.emit_maps = false;
  cfg.emit_high_contrast = false;
  cfg.output_depth = 16;
  const DatasetManifest m = build_dataset(cfg);
  CHECK_FALSE(m.records[0].attention_map.has_value());
  CHECK_FALSE(m.records[0].high_contrast.has_value());
  CHECK_FALSE(fs::exists(tmp / "out" / "attention"));
  CHECK(verify_dataset(m, tmp / "out").ok());
}

TEST_CASE("empty or missing input is a configuration error") {
  testutil::TempDir tmp("empty");
  fs::create_directories(tmp / "in");
  std::ofstream(tmp / "in" / "notes.txt") << "no images";
  CHECK_THROWS_AS(build_dataset(config_for(tmp / "in", tmp / "out")), ConfigError);
  CHECK_THROWS_AS(build_dataset(config_for(tmp / "nope", tmp / "out")), ConfigError);
}

TEST_CASE("split dataset") {
  DatasetManifest m;
  m.config = nlohmann::json::object();
  for (int i = 0; i < 120; ++i) {
    DatasetRecord r;
    r.source_path = "img_" + std::to_string(1000 + i) + ".png";
    r.selected = i < 100;
    m.records.push_back(r);
  }
  m.scanned = 120;
  m.selected = 100;

  const auto [train, test] = split_dataset(m, 0.01, 5);
  CHECK(test.records.size() == 1);
  CHECK(train.records.size() == 99);
  std::set<std::string> all;
  for (const auto& r : train.records) all.insert(r.source_path);
  for (const auto& r : test.records) CHECK(all.insert(r.source_path).second);
  CHECK(all.size() == 100);
  for (const auto& r : train.records) CHECK(r.selected);

  const auto again = split_dataset(m, 0.01, 5);
  CHECK(again.second.records[0].source_path == test.records[0].source_path);
  CHECK(split_dataset(m, 0.0, 5).second.records.empty());
  CHECK(split_dataset(m, 1.0, 5).first.records.empty());
  for (double f : {0.1, 0.25, 0.333, 0.5}) {
    const auto s = split_dataset(m, f, 11);
    CHECK(std::abs(static_cast<double>(s.second.records.size()) - f * 100) <= 1.0);
  }
  CHECK(train.split.at("role") == "train");

  DatasetManifest none = m;
  for (auto& r : none.records) r.selected = false;
  CHECK_THROWS_AS(split_dataset(none, 0.1, 1), ContractError);
  CHECK_THROWS_AS(split_dataset(m, 1.5, 1), ContractError);
}
