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

#include "lowlight/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "lowlight/errors.hpp"
#include "lowlight/io.hpp"
#include "lowlight/supervision.hpp"

namespace lowlight {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";
constexpr const char* kDarkDir = "dark";
constexpr const char* kNoisyDir = "noisy";
constexpr const char* kAttentionDir = "attention";
constexpr const char* kNoiseMapDir = "noise";
constexpr const char* kHighContrastDir = "high_contrast";
constexpr const char* kSidecarDir = "sidecars";
// Stored maps are 16-bit: half a code step plus rounding slack.
constexpr double kMapTolerance = 0.5 / 65535.0 + 1e-9;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& item : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return item.key() == k; })) {
      throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

SelectionConfig selection_config_from_json(const json& j) {
  check_keys(j, {"segment_size", "compactness", "slic_iterations", "block_mean_thresh",
                 "block_var_thresh", "exposure_rule", "bright_fraction_thresh",
                 "blur_thresh", "color_thresh"},
             "selection");
  SelectionConfig c;
  read(j, "segment_size", c.segment_size);
  read(j, "compactness", c.compactness);
  read(j, "slic_iterations", c.slic_iterations);
  read(j, "block_mean_thresh", c.block_mean_thresh);
  read(j, "block_var_thresh", c.block_var_thresh);
  std::string rule = "or";
  read(j, "exposure_rule", rule);
  if (rule == "or") {
    c.exposure_rule = ExposureRule::kMeanOrVariance;
  } else if (rule == "and") {
    c.exposure_rule = ExposureRule::kMeanAndVariance;
  } else {
    throw ConfigError("selection.exposure_rule must be 'or' or 'and'");
  }
  read(j, "bright_fraction_thresh", c.bright_fraction_thresh);
  read(j, "blur_thresh", c.blur_thresh);
  read(j, "color_thresh", c.color_thresh);
  return c;
}

json to_json(const SelectionConfig& c) {
  return {{"segment_size", c.segment_size},
          {"compactness", c.compactness},
          {"slic_iterations", c.slic_iterations},
          {"block_mean_thresh", c.block_mean_thresh},
          {"block_var_thresh", c.block_var_thresh},
          {"exposure_rule", c.exposure_rule == ExposureRule::kMeanOrVariance ? "or" : "and"},
          {"bright_fraction_thresh", c.bright_fraction_thresh},
          {"blur_thresh", c.blur_thresh},
          {"color_thresh", c.color_thresh}};
}

static Crf crf_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "srgb") return Crf::srgb();
    throw ConfigError("crf must be \"srgb\" or an array of 1024 samples");
  }
  if (j.is_array()) {
    try {
      return Crf::from_table(j.get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("crf table: ") + e.what());
    }
  }
  throw ConfigError("crf must be \"srgb\" or an array of 1024 samples");
}

static json crf_to_json(const Crf& crf) {
  if (crf.is_srgb()) return "srgb";
  return crf.table();
}

NoiseRanges noise_ranges_from_json(const json& j) {
  check_keys(j, {"sigma_p2_max", "sigma_g_max", "crf", "bayer_pattern"}, "noise");
  NoiseRanges n;
  read(j, "sigma_p2_max", n.sigma_p2_max);
  read(j, "sigma_g_max", n.sigma_g_max);
  if (j.contains("crf")) n.crf = crf_from_json(j.at("crf"));
  std::string pattern(to_string(n.pattern));
  read(j, "bayer_pattern", pattern);
  n.pattern = parse_bayer_pattern(pattern);
  if (n.sigma_p2_max < 0 || n.sigma_g_max < 0) {
    throw ConfigError("noise ranges must be non-negative");
  }
  return n;
}

json to_json(const NoiseRanges& n) {
  return {{"sigma_p2_max", n.sigma_p2_max},
          {"sigma_g_max", n.sigma_g_max},
          {"crf", crf_to_json(n.crf)},
          {"bayer_pattern", std::string(to_string(n.pattern))}};
}

FusionConfig fusion_config_from_json(const json& j) {
  check_keys(j, {"stack_size", "gamma_min", "gamma_max", "saturation_min", "saturation_max",
                 "w_contrast", "w_saturation", "w_exposedness", "sigma_exposedness",
                 "pyramid_levels", "detail_lambda", "detail_boost"},
             "fusion");
  FusionConfig f;
  read(j, "stack_size", f.stack_size);
  read(j, "gamma_min", f.gamma_min);
  read(j, "gamma_max", f.gamma_max);
  read(j, "saturation_min", f.saturation_min);
  read(j, "saturation_max", f.saturation_max);
  read(j, "w_contrast", f.w_contrast);
  read(j, "w_saturation", f.w_saturation);
  read(j, "w_exposedness", f.w_exposedness);
  read(j, "sigma_exposedness", f.sigma_exposedness);
  read(j, "pyramid_levels", f.pyramid_levels);
  read(j, "detail_lambda", f.detail_lambda);
  read(j, "detail_boost", f.detail_boost);
  return f;
}

json to_json(const FusionConfig& f) {
  return {{"stack_size", f.stack_size},
          {"gamma_min", f.gamma_min},
          {"gamma_max", f.gamma_max},
          {"saturation_min", f.saturation_min},
          {"saturation_max", f.saturation_max},
          {"w_contrast", f.w_contrast},
          {"w_saturation", f.w_saturation},
          {"w_exposedness", f.w_exposedness},
          {"sigma_exposedness", f.sigma_exposedness},
          {"pyramid_levels", f.pyramid_levels},
          {"detail_lambda", f.detail_lambda},
          {"detail_boost", f.detail_boost}};
}

json to_json(const SelectionReport& r) {
  return {{"bright_fraction", r.bright_fraction},
          {"blur_variance", r.blur_variance},
          {"colorfulness", r.colorfulness},
          {"darkness_pass", r.darkness_pass},
          {"blur_pass", r.blur_pass},
          {"color_pass", r.color_pass},
          {"selected", r.selected}};
}

json to_json(const SimulationParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}};
}

json to_json(const NoiseParams& p) {
  return {{"sigma_p", p.sigma_p},
          {"sigma_g", p.sigma_g},
          {"crf", p.crf.id()},
          {"bayer_pattern", std::string(to_string(p.pattern))},
          {"seed", p.seed}};
}

namespace {

SelectionReport selection_report_from_json(const json& j) {
  SelectionReport r;
  r.bright_fraction = j.at("bright_fraction").get<double>();
  r.blur_variance = j.at("blur_variance").get<double>();
  r.colorfulness = j.at("colorfulness").get<double>();
  r.darkness_pass = j.at("darkness_pass").get<bool>();
  r.blur_pass = j.at("blur_pass").get<bool>();
  r.color_pass = j.at("color_pass").get<bool>();
  r.selected = j.at("selected").get<bool>();
  return r;
}

json to_json(const DatasetRecord& r) {
  json j;
  j["source_path"] = r.source_path;
  j["record_seed"] = r.record_seed;
  j["selected"] = r.selected;
  if (r.selection) j["selection"] = to_json(*r.selection);
  if (r.sim_params) j["sim_params"] = to_json(*r.sim_params);
  if (r.noise_params) j["noise_params"] = to_json(*r.noise_params);
  json outputs = json::object();
  if (r.dark) outputs["dark"] = *r.dark;
  if (r.dark_noisy) outputs["dark_noisy"] = *r.dark_noisy;
  if (r.attention_map) outputs["attention_map"] = *r.attention_map;
  if (r.noise_map) outputs["noise_map"] = *r.noise_map;
  if (r.high_contrast) outputs["high_contrast"] = *r.high_contrast;
  j["outputs"] = outputs;
  j["sidecars"] = r.sidecars;
  if (r.error) j["error"] = *r.error;
  return j;
}

DatasetRecord record_from_json(const json& j, const Crf& table_crf) {
  DatasetRecord r;
  r.source_path = j.at("source_path").get<std::string>();
  r.record_seed = j.at("record_seed").get<std::uint64_t>();
  r.selected = j.at("selected").get<bool>();
  if (j.contains("selection")) r.selection = selection_report_from_json(j.at("selection"));
  if (j.contains("sim_params")) {
    const json& s = j.at("sim_params");
    r.sim_params = SimulationParams{s.at("alpha").get<double>(), s.at("beta").get<double>(),
                                    s.at("gamma").get<double>()};
  }
  if (j.contains("noise_params")) {
    const json& n = j.at("noise_params");
    NoiseParams p;
    p.sigma_p = n.at("sigma_p").get<double>();
    p.sigma_g = n.at("sigma_g").get<double>();
    p.crf = n.at("crf").get<std::string>() == "srgb" ? Crf::srgb() : table_crf;
    p.pattern = parse_bayer_pattern(n.at("bayer_pattern").get<std::string>());
    p.seed = n.at("seed").get<std::uint64_t>();
    r.noise_params = p;
  }
  const json outputs = j.value("outputs", json::object());
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (outputs.contains(key)) return outputs.at(key).get<std::string>();
    return std::nullopt;
  };
  r.dark = opt("dark");
  r.dark_noisy = opt("dark_noisy");
  r.attention_map = opt("attention_map");
  r.noise_map = opt("noise_map");
  r.high_contrast = opt("high_contrast");
  r.sidecars = j.value("sidecars", std::vector<std::string>{});
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct SourceFile {
  fs::path absolute;
  std::string relative;  // generic form
  std::vector<fs::path> sidecars;
};

std::vector<SourceFile> scan_sources(const fs::path& root) {
  std::vector<SourceFile> files;
  std::map<fs::path, std::vector<fs::path>> others_by_dir;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    if (has_image_extension(entry.path())) {
      files.push_back({entry.path(), entry.path().lexically_relative(root).generic_string(), {}});
    } else {
      others_by_dir[entry.path().parent_path()].push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const SourceFile& a, const SourceFile& b) { return a.relative < b.relative; });
  for (auto& f : files) {
    auto it = others_by_dir.find(f.absolute.parent_path());
    if (it == others_by_dir.end()) continue;
    for (const auto& other : it->second) {
      if (other.stem() == f.absolute.stem()) f.sidecars.push_back(other);
    }
    std::sort(f.sidecars.begin(), f.sidecars.end());
  }
  return files;
}

std::string output_rel(const char* dir, const std::string& source_rel) {
  fs::path p = fs::path(dir) / fs::path(source_rel);
  p.replace_extension(".png");
  return p.generic_string();
}

void process_record(const SourceFile& src, const PipelineConfig& cfg, DatasetRecord& rec) {
  std::vector<fs::path> written;
  try {
    const ImageRGB image = load_image(src.absolute);
    rec.selection = select(image, cfg.selection);
    rec.selected = rec.selection->selected;
    if (!rec.selected) return;

    std::mt19937_64 rng(rec.record_seed);
    rec.sim_params = sample_params(rng);
    rec.noise_params = sample_noise_params(rng, cfg.noise);

    const ImageRGB dark = quantize(darken(image, *rec.sim_params), cfg.output_depth);
    const ImageRGB noisy =
        quantize(synthesize_noise(dark, *rec.noise_params), cfg.output_depth);

    auto emit_image = [&](const char* dir, const ImageRGB& img, int depth) {
      const std::string rel = output_rel(dir, src.relative);
      const fs::path path = cfg.output_dir / rel;
      fs::create_directories(path.parent_path());
      written.push_back(path);
      save_image(img, path, depth);
      return rel;
    };
    auto emit_map = [&](const char* dir, const SupervisionMap& map) {
      const std::string rel = output_rel(dir, src.relative);
      const fs::path path = cfg.output_dir / rel;
      fs::create_directories(path.parent_path());
      written.push_back(path);
      save_map(map, path);
      return rel;
    };

    rec.dark = emit_image(kDarkDir, dark, cfg.output_depth);
    rec.dark_noisy = emit_image(kNoisyDir, noisy, cfg.output_depth);
    if (cfg.emit_maps) {
      rec.attention_map = emit_map(kAttentionDir, ue_attention_map(image, dark));
      rec.noise_map = emit_map(kNoiseMapDir, noise_map(noisy, dark));
    }
    if (cfg.emit_high_contrast) {
      rec.high_contrast =
          emit_image(kHighContrastDir, amplify_contrast(image, cfg.fusion), cfg.output_depth);
    }
    for (const auto& side : src.sidecars) {
      const fs::path rel_src = side.lexically_relative(cfg.input_dir);
      const fs::path rel = fs::path(kSidecarDir) / rel_src;
      const fs::path dst = cfg.output_dir / rel;
      fs::create_directories(dst.parent_path());
      written.push_back(dst);
      fs::copy_file(side, dst, fs::copy_options::overwrite_existing);
      rec.sidecars.push_back(rel.generic_string());
    }
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    const bool keep_selection = rec.selection.has_value();
    rec.selected = false;
    rec.sim_params.reset();
    rec.noise_params.reset();
    rec.dark.reset();
    rec.dark_noisy.reset();
    rec.attention_map.reset();
    rec.noise_map.reset();
    rec.high_contrast.reset();
    rec.sidecars.clear();
    if (!keep_selection) rec.selection.reset();
    rec.error = e.what();
  }
}

void prepare_output_dir(const PipelineConfig& cfg) {
  if (fs::exists(cfg.output_dir)) {
    const bool empty = fs::is_empty(cfg.output_dir);
    if (!empty && !cfg.overwrite) {
      throw ConfigError("output_dir '" + cfg.output_dir.string() +
                        "' is not empty (set overwrite to rebuild)");
    }
    if (!empty) {
      for (const char* d : {kDarkDir, kNoisyDir, kAttentionDir, kNoiseMapDir,
                            kHighContrastDir, kSidecarDir}) {
        fs::remove_all(cfg.output_dir / d);
      }
      fs::remove(cfg.output_dir / kManifestName);
    }
  }
  fs::create_directories(cfg.output_dir);
}

}  // namespace

std::optional<int> workers_from_env() {
  const char* env = std::getenv(kWorkersEnvVar);
  if (env == nullptr || *env == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(env, &used);
    if (n >= 1 && env[used] == '\0') return n;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string(kWorkersEnvVar) + " must be a positive integer");
}

void PipelineConfig::validate() const {
  if (input_dir.empty()) throw ConfigError("input_dir is required");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (output_depth != 8 && output_depth != 16) throw ConfigError("output_depth must be 8 or 16");
  const fs::path in = fs::weakly_canonical(input_dir);
  const fs::path out = fs::weakly_canonical(output_dir);
  if (in == out) throw ConfigError("input_dir and output_dir must differ");
  selection.validate();
  fusion.validate();
}

PipelineConfig pipeline_config_from_json(const json& j) {
  check_keys(j, {"input_dir", "output_dir", "master_seed", "selection", "noise", "fusion",
                 "workers", "emit_maps", "emit_high_contrast", "output_depth", "overwrite"},
             "pipeline config");
  PipelineConfig cfg;
  std::string in, out;
  read(j, "input_dir", in);
  read(j, "output_dir", out);
  cfg.input_dir = in;
  cfg.output_dir = out;
  read(j, "master_seed", cfg.master_seed);
  if (j.contains("selection")) cfg.selection = selection_config_from_json(j.at("selection"));
  if (j.contains("noise")) cfg.noise = noise_ranges_from_json(j.at("noise"));
  if (j.contains("fusion")) cfg.fusion = fusion_config_from_json(j.at("fusion"));
  read(j, "workers", cfg.workers);
  read(j, "emit_maps", cfg.emit_maps);
  read(j, "emit_high_contrast", cfg.emit_high_contrast);
  read(j, "output_depth", cfg.output_depth);
  read(j, "overwrite", cfg.overwrite);
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  PipelineConfig cfg = pipeline_config_from_json(j);
  // Relative directories in a config file are relative to the file.
  const fs::path base = path.parent_path();
  if (!cfg.input_dir.empty() && cfg.input_dir.is_relative()) cfg.input_dir = base / cfg.input_dir;
  if (!cfg.output_dir.empty() && cfg.output_dir.is_relative()) cfg.output_dir = base / cfg.output_dir;
  return cfg;
}

json config_snapshot(const PipelineConfig& cfg) {
  return {{"input_dir", fs::weakly_canonical(cfg.input_dir).generic_string()},
          {"master_seed", cfg.master_seed},
          {"selection", to_json(cfg.selection)},
          {"noise", to_json(cfg.noise)},
          {"fusion", to_json(cfg.fusion)},
          {"emit_maps", cfg.emit_maps},
          {"emit_high_contrast", cfg.emit_high_contrast},
          {"output_depth", cfg.output_depth}};
}

json to_json(const DatasetManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["config"] = m.config;
  j["summary"] = {{"scanned", m.scanned}, {"selected", m.selected}, {"failed", m.failed}};
  if (!m.split.is_null()) j["split"] = m.split;
  json records = json::array();
  for (const auto& r : m.records) records.push_back(to_json(r));
  j["records"] = std::move(records);
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion) {
      throw ConfigError("unsupported manifest schema_version " +
                        std::to_string(m.schema_version));
    }
    m.config = j.at("config");
    Crf table_crf = Crf::srgb();
    if (m.config.contains("noise") && m.config.at("noise").contains("crf")) {
      table_crf = crf_from_json(m.config.at("noise").at("crf"));
    }
    const json& summary = j.at("summary");
    m.scanned = summary.at("scanned").get<std::size_t>();
    m.selected = summary.at("selected").get<std::size_t>();
    m.failed = summary.at("failed").get<std::size_t>();
    if (j.contains("split")) m.split = j.at("split");
    for (const auto& r : j.at("records")) m.records.push_back(record_from_json(r, table_crf));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << to_json(manifest).dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest '" + path.string() + "'");
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("manifest '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return manifest_from_json(j);
}

std::uint64_t record_seed(std::uint64_t master_seed, const std::string& source_path) {
  // FNV-1a over the little-endian seed bytes, then the path bytes.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(master_seed >> (8 * i)));
  for (char ch : source_path) mix(static_cast<unsigned char>(ch));
  return splitmix64(h);
}

DatasetManifest build_dataset(const PipelineConfig& cfg_in) {
  const PipelineConfig& cfg = cfg_in;
  cfg.validate();
  if (!fs::is_directory(cfg.input_dir)) {
    throw ConfigError("input_dir '" + cfg.input_dir.string() + "' is not a directory");
  }
  const std::vector<SourceFile> sources = scan_sources(cfg.input_dir);
  if (sources.empty()) {
    throw ConfigError("input_dir '" + cfg.input_dir.string() + "' contains no PNG/JPEG files");
  }
  prepare_output_dir(cfg);

  std::vector<DatasetRecord> records(sources.size());
  std::set<std::string> claimed;
  std::vector<bool> skip(sources.size(), false);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    records[i].source_path = sources[i].relative;
    records[i].record_seed = record_seed(cfg.master_seed, sources[i].relative);
    // a.png and a.jpg would both write a.png.
    if (!claimed.insert(output_rel("", sources[i].relative)).second) {
      records[i].error = "output name collides with an earlier source of the same stem";
      skip[i] = true;
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < sources.size(); i = next++) {
      if (!skip[i]) process_record(sources[i], cfg, records[i]);
    }
  };
  const auto n_threads = static_cast<std::size_t>(
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), sources.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  DatasetManifest manifest;
  manifest.config = config_snapshot(cfg);
  manifest.records = std::move(records);
  manifest.scanned = manifest.records.size();
  for (const auto& r : manifest.records) {
    if (r.selected) ++manifest.selected;
    if (r.error) ++manifest.failed;
  }
  save_manifest(manifest, cfg.output_dir / kManifestName);
  return manifest;
}

std::pair<DatasetManifest, DatasetManifest> split_dataset(const DatasetManifest& manifest,
                                                          double test_fraction,
                                                          std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw ContractError("split_dataset: test_fraction must lie in [0,1]");
  }
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (manifest.records[i].selected) selected.push_back(i);
  }
  if (selected.empty()) throw ContractError("split_dataset: manifest has no selected records");

  std::vector<std::size_t> order = selected;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit bounded draw so the split does not depend
  // on the standard library's shuffle.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(selected.size())));
  std::set<std::size_t> test_set(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));

  auto make = [&](const char* role, bool test) {
    DatasetManifest m;
    m.schema_version = manifest.schema_version;
    m.config = manifest.config;
    for (std::size_t i : selected) {
      if ((test_set.count(i) > 0) == test) m.records.push_back(manifest.records[i]);
    }
    m.scanned = m.records.size();
    m.selected = m.records.size();
    m.failed = 0;
    m.split = {{"role", role}, {"test_fraction", test_fraction}, {"seed", seed},
               {"parent_selected", selected.size()}};
    return m;
  };
  return {make("train", false), make("test", true)};
}

json to_json(const VerificationReport& report) {
  json v = json::array();
  for (const auto& x : report.violations) {
    v.push_back({{"source_path", x.source_path}, {"path", x.path}, {"message", x.message}});
  }
  return {{"ok", report.ok()},
          {"records_checked", report.records_checked},
          {"reproductions_checked", report.reproductions_checked},
          {"violation_count", report.violations.size()},
          {"violations", v}};
}

VerificationReport verify_dataset(const DatasetManifest& manifest, const fs::path& output_dir,
                                  std::optional<fs::path> input_dir_override) {
  VerificationReport report;
  auto violate = [&](const std::string& src, const std::string& path, const std::string& msg) {
    report.violations.push_back({src, path, msg});
  };

  fs::path input_dir;
  if (input_dir_override) {
    input_dir = *input_dir_override;
  } else {
    input_dir = manifest.config.value("input_dir", std::string());
  }
  NoiseRanges ranges;
  int depth = 8;
  std::uint64_t master_seed = 0;
  try {
    ranges = noise_ranges_from_json(manifest.config.at("noise"));
    depth = manifest.config.at("output_depth").get<int>();
    master_seed = manifest.config.at("master_seed").get<std::uint64_t>();
  } catch (const std::exception& e) {
    violate("", "", std::string("config snapshot unreadable: ") + e.what());
    return report;
  }

  if (manifest.split.is_null() && manifest.scanned != manifest.records.size()) {
    violate("", "", "summary.scanned does not match the record count");
  }
  std::size_t selected_count = 0;
  std::set<std::string> referenced;
  std::size_t selected_index = 0;

  for (const auto& rec : manifest.records) {
    ++report.records_checked;
    if (rec.record_seed != record_seed(master_seed, rec.source_path)) {
      violate(rec.source_path, "", "record_seed does not match hash(master_seed, path)");
    }
    const std::vector<const std::optional<std::string>*> outputs = {
        &rec.dark, &rec.dark_noisy, &rec.attention_map, &rec.noise_map, &rec.high_contrast};
    for (const auto* o : outputs) {
      if (o->has_value()) referenced.insert(**o);
    }
    for (const auto& s : rec.sidecars) referenced.insert(s);
    if (!rec.selected) {
      const bool any = std::any_of(outputs.begin(), outputs.end(),
                                   [](const auto* o) { return o->has_value(); });
      if (any || !rec.sidecars.empty()) {
        violate(rec.source_path, "", "unselected record references synthesis outputs");
      }
      continue;
    }
    ++selected_count;
    const bool reproduce = selected_index++ % 100 == 0;
    if (rec.selection && !rec.selection->selected) {
      violate(rec.source_path, "", "selected record carries a failing selection report");
    }
    if (!rec.sim_params || !rec.noise_params || !rec.dark || !rec.dark_noisy) {
      violate(rec.source_path, "", "selected record lacks parameters or images");
      continue;
    }
    if (!rec.sim_params->in_sampling_range()) {
      violate(rec.source_path, "", "sim_params outside the sampling ranges");
    }
    if (rec.noise_params->sigma_p < 0 || rec.noise_params->sigma_g < 0) {
      violate(rec.source_path, "", "negative noise parameters");
    }

    std::optional<ImageRGB> source;
    try {
      source = load_image(input_dir / rec.source_path);
    } catch (const std::exception& e) {
      violate(rec.source_path, (input_dir / rec.source_path).string(),
              std::string("source unreadable: ") + e.what());
      continue;
    }
    auto load_rgb = [&](const std::string& rel) -> std::optional<ImageRGB> {
      try {
        ImageRGB img = load_image(output_dir / rel);
        if (!img.same_shape(*source)) {
          violate(rec.source_path, rel, "dimensions differ from the source image");
          return std::nullopt;
        }
        return img;
      } catch (const std::exception& e) {
        violate(rec.source_path, rel, std::string("unreadable: ") + e.what());
        return std::nullopt;
      }
    };
    auto load_sup = [&](const std::string& rel) -> std::optional<SupervisionMap> {
      try {
        SupervisionMap map = load_map(output_dir / rel);
        if (map.width() != source->width() || map.height() != source->height()) {
          violate(rec.source_path, rel, "dimensions differ from the source image");
          return std::nullopt;
        }
        return map;
      } catch (const std::exception& e) {
        violate(rec.source_path, rel, std::string("unreadable: ") + e.what());
        return std::nullopt;
      }
    };

    const std::optional<ImageRGB> dark = load_rgb(*rec.dark);
    const std::optional<ImageRGB> noisy = load_rgb(*rec.dark_noisy);
    if (rec.high_contrast) load_rgb(*rec.high_contrast);

    auto compare = [&](const SupervisionMap& stored, const SupervisionMap& derived,
                       const std::string& rel, const char* what) {
      double worst = 0.0;
      for (std::size_t i = 0; i < stored.plane().size(); ++i) {
        worst = std::max(worst, std::abs(stored[i] - derived[i]));
      }
      if (worst > kMapTolerance) {
        violate(rec.source_path, rel,
                std::string(what) + " recheck failed (max deviation " + std::to_string(worst) + ")");
      }
    };
    if (rec.attention_map) {
      const auto stored = load_sup(*rec.attention_map);
      if (stored && dark) compare(*stored, ue_attention_map(*source, *dark), *rec.attention_map, "attention map");
    }
    if (rec.noise_map) {
      const auto stored = load_sup(*rec.noise_map);
      if (stored && dark && noisy) compare(*stored, noise_map(*noisy, *dark), *rec.noise_map, "noise map");
    }

    if (reproduce && dark && noisy) {
      ++report.reproductions_checked;
      std::mt19937_64 rng(rec.record_seed);
      const SimulationParams sim = sample_params(rng);
      const NoiseParams noise = sample_noise_params(rng, ranges);
      if (sim.alpha != rec.sim_params->alpha || sim.beta != rec.sim_params->beta ||
          sim.gamma != rec.sim_params->gamma) {
        violate(rec.source_path, "", "sim_params do not reproduce from record_seed");
      }
      if (noise.sigma_p != rec.noise_params->sigma_p || noise.sigma_g != rec.noise_params->sigma_g ||
          noise.seed != rec.noise_params->seed || noise.pattern != rec.noise_params->pattern) {
        violate(rec.source_path, "", "noise_params do not reproduce from record_seed");
      }
      const ImageRGB dark_again = quantize(darken(*source, *rec.sim_params), depth);
      const ImageRGB noisy_again = quantize(synthesize_noise(*dark, *rec.noise_params), depth);
      auto identical = [](const ImageRGB& a, const ImageRGB& b) {
        for (int c = 0; c < 3; ++c) {
          for (std::size_t i = 0; i < a.pixel_count(); ++i) {
            if (a.channel(c)[i] != b.channel(c)[i]) return false;
          }
        }
        return true;
      };
      if (!identical(dark_again, *dark)) {
        violate(rec.source_path, *rec.dark, "dark image does not reproduce from sim_params");
      }
      if (!identical(noisy_again, *noisy)) {
        violate(rec.source_path, *rec.dark_noisy, "noisy image does not reproduce from noise_params");
      }
    }
  }
  if (manifest.split.is_null() && selected_count != manifest.selected) {
    violate("", "", "summary.selected does not match the selected records");
  }

  // Closure: referenced files exist, and nothing else lives in output_dir.
  std::error_code ec;
  for (const auto& rel : referenced) {
    if (!fs::is_regular_file(output_dir / rel, ec)) violate("", rel, "referenced file is missing");
  }
  if (manifest.split.is_null() && fs::is_directory(output_dir, ec)) {
    for (const auto& entry : fs::recursive_directory_iterator(output_dir)) {
      if (!entry.is_regular_file()) continue;
      const fs::path rel = entry.path().lexically_relative(output_dir);
      const std::string name = rel.generic_string();
      const bool top_level_json = rel.parent_path().empty() && rel.extension() == ".json";
      if (top_level_json) continue;
      if (referenced.count(name) == 0) violate("", name, "file not referenced by the manifest");
    }
  }
  return report;
}

}  // namespace lowlight
