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

// Command-line front end for dataset construction and evaluation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lowlight/curves.hpp"
#include "lowlight/errors.hpp"
#include "lowlight/fusion.hpp"
#include "lowlight/io.hpp"
#include "lowlight/metrics.hpp"
#include "lowlight/pipeline.hpp"
#include "lowlight/selection.hpp"
#include "lowlight/simulation.hpp"
#include "lowlight/supervision.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lowlight;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Image files under root, keyed by relative path without extension.
std::map<std::string, fs::path> images_by_stem(const fs::path& root) {
  if (!fs::is_directory(root)) throw ConfigError("'" + root.string() + "' is not a directory");
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
    fs::path key = entry.path().lexically_relative(root);
    key.replace_extension();
    out.emplace(key.generic_string(), entry.path());
  }
  return out;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

int run_select(const fs::path& input_dir, const std::optional<fs::path>& config,
               const fs::path& report_path) {
  SelectionConfig cfg;
  if (config) {
    const json j = read_json(*config);
    cfg = selection_config_from_json(j.contains("selection") ? j.at("selection") : j);
  }
  cfg.validate();
  json out = json::array();
  for (const auto& [stem, path] : images_by_stem(input_dir)) {
    json row;
    row["file"] = path.lexically_relative(input_dir).generic_string();
    try {
      row.update(to_json(select(load_image(path), cfg)));
    } catch (const std::exception& e) {
      row["error"] = e.what();
    }
    out.push_back(std::move(row));
  }
  write_text(report_path, out.dump(2) + "\n");
  return 0;
}

struct SynthesizeArgs {
  fs::path input, params_out, dark, noisy;
  std::uint64_t seed = 0;
  std::optional<double> alpha, beta, gamma, sigma_p, sigma_g;
  int depth = 8;
};

int run_synthesize(const SynthesizeArgs& a) {
  const ImageRGB image = load_image(a.input);
  std::mt19937_64 rng(a.seed);
  SimulationParams sim = sample_params(rng);
  NoiseParams noise = sample_noise_params(rng, NoiseRanges{});
  if (a.alpha) sim.alpha = *a.alpha;
  if (a.beta) sim.beta = *a.beta;
  if (a.gamma) sim.gamma = *a.gamma;
  if (a.sigma_p) noise.sigma_p = *a.sigma_p;
  if (a.sigma_g) noise.sigma_g = *a.sigma_g;
  noise.validate();

  const ImageRGB dark = quantize(darken(image, sim), a.depth);
  const ImageRGB noisy = quantize(synthesize_noise(dark, noise), a.depth);
  save_image(dark, a.dark, a.depth);
  save_image(noisy, a.noisy, a.depth);
  const json params = {{"seed", a.seed},
                       {"sim_params", to_json(sim)},
                       {"noise_params", to_json(noise)}};
  write_text(a.params_out, params.dump(2) + "\n");
  return 0;
}

int run_maps(const fs::path& bright, const fs::path& dark, const fs::path& noisy,
             const fs::path& attention_out, const fs::path& noise_out) {
  const ImageRGB b = load_image(bright);
  const ImageRGB d = load_image(dark);
  const ImageRGB n = load_image(noisy);
  save_map(ue_attention_map(b, d), attention_out);
  save_map(noise_map(n, d), noise_out);
  return 0;
}

int run_fuse(const fs::path& input, const fs::path& output, FusionConfig cfg, int depth) {
  cfg.validate();
  save_image(amplify_contrast(load_image(input), cfg), output, depth);
  return 0;
}

int run_metrics(const fs::path& pred_dir, const fs::path& ref_dir,
                const std::optional<fs::path>& attention_dir, const fs::path& out) {
  const auto preds = images_by_stem(pred_dir);
  const auto refs = images_by_stem(ref_dir);
  std::map<std::string, fs::path> maps;
  if (attention_dir) maps = images_by_stem(*attention_dir);

  std::ostringstream csv;
  csv << "# perceptual (VGG) term omitted from composite; weights bright=1 structural=1 "
         "regional=5 lambda=10\n";
  csv << "file,psnr,ssim,ab,loe,bright_loss,structural_loss,regional_loss,composite\n";
  int missing = 0;
  for (const auto& [stem, pred_path] : preds) {
    const auto ref = refs.find(stem);
    if (ref == refs.end()) {
      std::cerr << "warning: no reference for " << stem << "\n";
      ++missing;
      continue;
    }
    std::optional<SupervisionMap> attention;
    if (attention_dir) {
      const auto m = maps.find(stem);
      if (m != maps.end()) attention = load_map(m->second);
    }
    const QualityReport r = evaluate(load_image(pred_path), load_image(ref->second),
                                     attention ? &*attention : nullptr);
    csv << pred_path.lexically_relative(pred_dir).generic_string() << ','
        << format_number(r.psnr) << ',' << format_number(r.ssim) << ','
        << format_number(r.ab) << ',' << format_number(r.loe) << ','
        << format_number(r.bright_loss) << ',' << format_number(r.structural_loss) << ','
        << (r.regional_loss ? format_number(*r.regional_loss) : "") << ','
        << (r.composite ? format_number(*r.composite) : "") << '\n';
  }
  write_text(out, csv.str());
  return missing == 0 ? 0 : 1;
}

int run_curves(const fs::path& low_dir, const fs::path& ref_dir, const fs::path& report) {
  const auto lows = images_by_stem(low_dir);
  const auto refs = images_by_stem(ref_dir);
  std::vector<NamedPair> pairs;
  for (const auto& [stem, low_path] : lows) {
    const auto ref = refs.find(stem);
    if (ref == refs.end()) {
      std::cerr << "warning: no reference for " << stem << "\n";
      continue;
    }
    pairs.push_back({stem, load_image(low_path), load_image(ref->second)});
  }
  dataset_curve_report(std::move(pairs), report);
  return 0;
}

struct BuildFlags {
  std::optional<fs::path> config;
  std::optional<std::string> input_dir, output_dir;
  std::optional<std::uint64_t> master_seed;
  std::optional<int> workers, output_depth;
  std::optional<bool> emit_maps, emit_high_contrast, overwrite;
};

int run_build(const BuildFlags& f) {
  PipelineConfig cfg = f.config ? load_pipeline_config(*f.config) : PipelineConfig{};
  if (const auto env = workers_from_env()) cfg.workers = *env;
  if (f.input_dir) cfg.input_dir = *f.input_dir;
  if (f.output_dir) cfg.output_dir = *f.output_dir;
  if (f.master_seed) cfg.master_seed = *f.master_seed;
  if (f.workers) cfg.workers = *f.workers;
  if (f.output_depth) cfg.output_depth = *f.output_depth;
  if (f.emit_maps) cfg.emit_maps = *f.emit_maps;
  if (f.emit_high_contrast) cfg.emit_high_contrast = *f.emit_high_contrast;
  if (f.overwrite) cfg.overwrite = *f.overwrite;

  const DatasetManifest m = build_dataset(cfg);
  std::cout << "scanned " << m.scanned << ", selected " << m.selected << ", failed "
            << m.failed << "\nmanifest: " << (cfg.output_dir / "manifest.json").string()
            << "\n";
  return 0;
}

int run_verify(const fs::path& manifest_path, const std::optional<fs::path>& input_dir,
               const std::optional<fs::path>& report_path) {
  const DatasetManifest m = load_manifest(manifest_path);
  const fs::path output_dir = fs::absolute(manifest_path).parent_path();
  const VerificationReport r = verify_dataset(m, output_dir, input_dir);
  const json j = to_json(r);
  if (report_path) write_text(*report_path, j.dump(2) + "\n");
  for (const auto& v : r.violations) {
    std::cout << "VIOLATION " << (v.source_path.empty() ? "-" : v.source_path) << " "
              << (v.path.empty() ? "-" : v.path) << ": " << v.message << "\n";
  }
  std::cout << r.records_checked << " records checked, " << r.reproductions_checked
            << " reproduced, " << r.violations.size() << " violations\n";
  return r.ok() ? 0 : 1;
}

int run_split(const fs::path& manifest_path, double fraction, std::uint64_t seed,
              std::optional<fs::path> train_out, std::optional<fs::path> test_out) {
  const DatasetManifest m = load_manifest(manifest_path);
  const auto [train, test] = split_dataset(m, fraction, seed);
  const fs::path dir = manifest_path.parent_path();
  const std::string stem = manifest_path.stem().string();
  save_manifest(train, train_out.value_or(dir / (stem + ".train.json")));
  save_manifest(test, test_out.value_or(dir / (stem + ".test.json")));
  std::cout << "train " << train.records.size() << ", test " << test.records.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lowlight_forge: low-light dataset synthesis, fusion and evaluation"};
  app.require_subcommand(1);
  int status = 0;

  auto* sel = app.add_subcommand("select", "Score candidate images for exposure, blur and color");
  fs::path sel_input, sel_report;
  std::optional<fs::path> sel_config;
  sel->add_option("--input-dir", sel_input, "Directory of candidate images")->required();
  sel->add_option("--config", sel_config, "SelectionConfig JSON (or a pipeline config)");
  sel->add_option("--report", sel_report, "Output JSON array")->required();
  sel->callback([&] { status = run_select(sel_input, sel_config, sel_report); });

  auto* syn = app.add_subcommand("synthesize", "Darken one image and add sensor noise");
  SynthesizeArgs sa;
  syn->add_option("--input", sa.input)->required();
  syn->add_option("--seed", sa.seed)->required();
  syn->add_option("--params-out", sa.params_out)->required();
  syn->add_option("--dark", sa.dark)->required();
  syn->add_option("--noisy", sa.noisy)->required();
  syn->add_option("--alpha", sa.alpha);
  syn->add_option("--beta", sa.beta);
  syn->add_option("--gamma", sa.gamma);
  syn->add_option("--sigma-p", sa.sigma_p);
  syn->add_option("--sigma-g", sa.sigma_g);
  syn->add_option("--depth", sa.depth)->check(CLI::IsMember({8, 16}));
  syn->callback([&] { status = run_synthesize(sa); });

  auto* maps = app.add_subcommand("maps", "Compute attention and noise maps");
  fs::path m_bright, m_dark, m_noisy, m_att, m_noise;
  maps->add_option("--bright", m_bright)->required();
  maps->add_option("--dark", m_dark)->required();
  maps->add_option("--noisy", m_noisy)->required();
  maps->add_option("--attention", m_att)->required();
  maps->add_option("--noise", m_noise)->required();
  maps->callback([&] { status = run_maps(m_bright, m_dark, m_noisy, m_att, m_noise); });

  auto* fuse = app.add_subcommand("fuse", "Build a high-contrast reference");
  fs::path f_in, f_out;
  std::optional<fs::path> f_config;
  std::optional<int> f_stack, f_levels;
  std::optional<double> f_boost, f_lambda;
  int f_depth = 8;
  fuse->add_option("--input", f_in)->required();
  fuse->add_option("--output", f_out)->required();
  fuse->add_option("--config", f_config, "FusionConfig JSON");
  fuse->add_option("--stack-size", f_stack);
  fuse->add_option("--pyramid-levels", f_levels);
  fuse->add_option("--detail-boost", f_boost);
  fuse->add_option("--detail-lambda", f_lambda);
  fuse->add_option("--depth", f_depth)->check(CLI::IsMember({8, 16}));
  fuse->callback([&] {
    FusionConfig cfg;
    if (f_config) {
      const json j = read_json(*f_config);
      cfg = fusion_config_from_json(j.contains("fusion") ? j.at("fusion") : j);
    }
    if (f_stack) cfg.stack_size = *f_stack;
    if (f_levels) cfg.pyramid_levels = *f_levels;
    if (f_boost) cfg.detail_boost = *f_boost;
    if (f_lambda) cfg.detail_lambda = *f_lambda;
    status = run_fuse(f_in, f_out, cfg, f_depth);
  });

  auto* met = app.add_subcommand("metrics", "Score predictions against references");
  fs::path me_pred, me_ref, me_out;
  std::optional<fs::path> me_att;
  met->add_option("--pred-dir", me_pred)->required();
  met->add_option("--ref-dir", me_ref)->required();
  met->add_option("--attention-dir", me_att);
  met->add_option("--out", me_out)->required();
  met->callback([&] { status = run_metrics(me_pred, me_ref, me_att, me_out); });

  auto* cur = app.add_subcommand("curves", "Estimate exposure adjustment curves");
  fs::path c_low, c_ref, c_report;
  cur->add_option("--low-dir", c_low)->required();
  cur->add_option("--ref-dir", c_ref)->required();
  cur->add_option("--report", c_report)->required();
  cur->callback([&] { status = run_curves(c_low, c_ref, c_report); });

  auto* build = app.add_subcommand("build", "Build a dataset and its manifest");
  BuildFlags bf;
  build->add_option("--config", bf.config, "PipelineConfig JSON");
  build->add_option("--input-dir", bf.input_dir);
  build->add_option("--output-dir", bf.output_dir);
  build->add_option("--master-seed", bf.master_seed);
  build->add_option("--workers", bf.workers)->check(CLI::PositiveNumber);
  build->add_option("--output-depth", bf.output_depth)->check(CLI::IsMember({8, 16}));
  build->add_option("--emit-maps", bf.emit_maps);
  build->add_option("--emit-high-contrast", bf.emit_high_contrast);
  build->add_option("--overwrite", bf.overwrite);
  build->callback([&] { status = run_build(bf); });

  auto* ver = app.add_subcommand("verify", "Check a built dataset against its manifest");
  fs::path v_manifest;
  std::optional<fs::path> v_input, v_report;
  ver->add_option("--manifest", v_manifest)->required();
  ver->add_option("--input-dir", v_input, "Override the recorded input directory");
  ver->add_option("--report", v_report, "Write the report as JSON");
  ver->callback([&] { status = run_verify(v_manifest, v_input, v_report); });

  auto* spl = app.add_subcommand("split", "Split selected records into train and test");
  fs::path s_manifest;
  double s_fraction = 0.01;
  std::uint64_t s_seed = 0;
  std::optional<fs::path> s_train, s_test;
  spl->add_option("--manifest", s_manifest)->required();
  spl->add_option("--test-fraction", s_fraction)->check(CLI::Range(0.0, 1.0));
  spl->add_option("--seed", s_seed)->required();
  spl->add_option("--train-out", s_train);
  spl->add_option("--test-out", s_test);
  spl->callback([&] { status = run_split(s_manifest, s_fraction, s_seed, s_train, s_test); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
