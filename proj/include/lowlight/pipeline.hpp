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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lowlight/fusion.hpp"
#include "lowlight/selection.hpp"
#include "lowlight/simulation.hpp"

namespace lowlight {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kWorkersEnvVar = "LOWLIGHT_FORGE_WORKERS";

struct PipelineConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir;
  std::uint64_t master_seed = 0;
  SelectionConfig selection;
  NoiseRanges noise;
  FusionConfig fusion;
  int workers = 1;
  bool emit_maps = true;
  bool emit_high_contrast = true;
  int output_depth = 8;
  // Allows building into a non-empty output_dir; only the directories and
  // manifest this tool writes are cleared.
  bool overwrite = false;

  void validate() const;
};

// Value of LOWLIGHT_FORGE_WORKERS when set; ConfigError if it is not a
// positive integer.
std::optional<int> workers_from_env();

// JSON forms shared by the manifest and the CLI. Keys mirror the struct
// fields; unknown keys raise ConfigError.
SelectionConfig selection_config_from_json(const nlohmann::json& j);
NoiseRanges noise_ranges_from_json(const nlohmann::json& j);
FusionConfig fusion_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SelectionConfig& cfg);
nlohmann::json to_json(const NoiseRanges& ranges);
nlohmann::json to_json(const FusionConfig& cfg);
nlohmann::json to_json(const SelectionReport& report);
nlohmann::json to_json(const SimulationParams& params);
nlohmann::json to_json(const NoiseParams& params);

PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
// Snapshot stored in manifests: everything that affects outputs, nothing
// that does not (workers, output_dir, overwrite).
nlohmann::json config_snapshot(const PipelineConfig& cfg);

struct DatasetRecord {
  std::string source_path;  // relative to input_dir, '/'-separated
  std::uint64_t record_seed = 0;
  bool selected = false;
  std::optional<SelectionReport> selection;
  std::optional<SimulationParams> sim_params;
  std::optional<NoiseParams> noise_params;
  // Output paths relative to output_dir.
  std::optional<std::string> dark;
  std::optional<std::string> dark_noisy;
  std::optional<std::string> attention_map;
  std::optional<std::string> noise_map;
  std::optional<std::string> high_contrast;
  std::vector<std::string> sidecars;
  std::optional<std::string> error;
};

struct DatasetManifest {
  int schema_version = kManifestSchemaVersion;
  nlohmann::json config;
  std::vector<DatasetRecord> records;
  std::size_t scanned = 0;
  std::size_t selected = 0;
  std::size_t failed = 0;
  // Present on manifests produced by split_dataset.
  nlohmann::json split;
};

nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

// Stable 64-bit hash of (master_seed, canonical relative path).
std::uint64_t record_seed(std::uint64_t master_seed, const std::string& source_path);

// Generates every artifact and writes <output_dir>/manifest.json. Per-image
// failures are recorded on the record; the run continues.
DatasetManifest build_dataset(const PipelineConfig& cfg);

// Deterministic shuffled split of the selected records.
std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& manifest,
                                                          double test_fraction,
                                                          std::uint64_t seed);

struct Violation {
  std::string source_path;  // empty for dataset-level findings
  std::string path;
  std::string message;
};

struct VerificationReport {
  std::size_t records_checked = 0;
  std::size_t reproductions_checked = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

nlohmann::json to_json(const VerificationReport& report);

// Re-derives maps from stored images, checks value ranges and dimensions,
// re-runs the synthesis for one record in every hundred, and checks that
// output_dir holds exactly the referenced files.
VerificationReport verify_dataset(const DatasetManifest& manifest,
                                  const std::filesystem::path& output_dir,
                                  std::optional<std::filesystem::path> input_dir = std::nullopt);

}  // namespace lowlight
