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

#include "lowlight/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "json.hpp"

#include "lowlight/errors.hpp"

namespace lowlight {
namespace {

std::vector<std::uint64_t> cumulative(const std::vector<std::uint64_t>& hist) {
  std::vector<std::uint64_t> out(hist.size());
  std::uint64_t run = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    run += hist[i];
    out[i] = run;
  }
  return out;
}

}  // namespace

ToneCurve::ToneCurve(const Lut& lut) : lut_(lut) {
  for (int k = 0; k < kSize; ++k) {
    const double v = lut_[static_cast<std::size_t>(k)];
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ContractError("ToneCurve: entry outside [0,1]");
    }
    if (k > 0 && v < lut_[static_cast<std::size_t>(k - 1)]) {
      throw ContractError("ToneCurve: lookup table is not monotone");
    }
  }
}

ToneCurve ToneCurve::identity() {
  Lut lut{};
  for (int k = 0; k < kSize; ++k) lut[static_cast<std::size_t>(k)] = k / 255.0;
  ToneCurve c(lut);
  return c;
}

double ToneCurve::evaluate(double v) const {
  const double pos = std::clamp(v, 0.0, 1.0) * (kSize - 1);
  const int i = std::min(static_cast<int>(pos), kSize - 2);
  const double t = pos - i;
  const double a = lut_[static_cast<std::size_t>(i)];
  const double b = lut_[static_cast<std::size_t>(i + 1)];
  return a + t * (b - a);
}

CurveEstimate estimate_curve(const ImageRGB& low, const ImageRGB& ref) {
  const auto low_hist = histogram(value_plane(low), ToneCurve::kSize);
  const auto ref_hist = histogram(value_plane(ref), ToneCurve::kSize);
  const auto low_cdf = cumulative(low_hist);
  const auto ref_cdf = cumulative(ref_hist);
  const std::uint64_t n_low = low_cdf.back();
  const std::uint64_t n_ref = ref_cdf.back();

  constexpr std::uint64_t kMaxCount = std::uint64_t{1} << 32;
  if (n_low >= kMaxCount || n_ref >= kMaxCount) {
    throw ContractError("estimate_curve: images above 2^32 pixels are not supported");
  }
  // G^-1(F(k)): smallest j with ref_cdf[j]/n_ref >= low_cdf[k]/n_low, in
  // exact integer arithmetic (both products fit in 64 bits).
  auto matched = [&](std::size_t k) {
    const std::uint64_t target = low_cdf[k] * n_ref;
    std::size_t j = 0;
    while (j + 1 < ref_cdf.size() && ref_cdf[j] * n_low < target) {
      ++j;
    }
    return static_cast<double>(j) / (ToneCurve::kSize - 1);
  };

  std::vector<std::size_t> anchors;
  for (std::size_t k = 0; k < low_hist.size(); ++k) {
    if (k == 0 || k + 1 == low_hist.size() || low_hist[k] > 0) anchors.push_back(k);
  }
  ToneCurve::Lut lut{};
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    lut[anchors[a]] = matched(anchors[a]);
  }
  for (std::size_t a = 0; a + 1 < anchors.size(); ++a) {
    const std::size_t k0 = anchors[a], k1 = anchors[a + 1];
    for (std::size_t k = k0 + 1; k < k1; ++k) {
      const double t = static_cast<double>(k - k0) / static_cast<double>(k1 - k0);
      lut[k] = lut[k0] + t * (lut[k1] - lut[k0]);
    }
  }

  const auto populated = std::count_if(low_hist.begin(), low_hist.end(),
                                       [](std::uint64_t c) { return c > 0; });
  return {ToneCurve(lut), populated <= 1};
}

ImageRGB apply_curve(const ImageRGB& image, const ToneCurve& curve) {
  constexpr double kEps = 1e-12;
  ImageRGB out(image.width(), image.height());
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const double r = image.channel(0)[i], g = image.channel(1)[i], b = image.channel(2)[i];
    const double v = std::max({r, g, b});
    const double mapped = curve.evaluate(v);
    if (v < kEps) {
      for (int c = 0; c < 3; ++c) out.channel(c)[i] = mapped;
      continue;
    }
    const double scale = mapped / v;
    out.channel(0)[i] = r * scale;
    out.channel(1)[i] = g * scale;
    out.channel(2)[i] = b * scale;
  }
  out.clamp();
  return out;
}

double curve_severity(const ToneCurve& curve) {
  // Segments [k, k+1]/255 lying in the lower half: k + 1 <= 127.5.
  double steepest = 0.0;
  for (int k = 0; k + 1 <= (ToneCurve::kSize - 1) / 2; ++k) {
    steepest = std::max(steepest, (curve[k + 1] - curve[k]) * (ToneCurve::kSize - 1));
  }
  return steepest;
}

double wasserstein1(const Plane& a, const Plane& b, int bins) {
  const auto ca = cumulative(histogram(a, bins));
  const auto cb = cumulative(histogram(b, bins));
  const double na = static_cast<double>(ca.back());
  const double nb = static_cast<double>(cb.back());
  double total = 0.0;
  for (std::size_t k = 0; k < ca.size(); ++k) {
    total += std::abs(static_cast<double>(ca[k]) / na - static_cast<double>(cb[k]) / nb);
  }
  return total / bins;
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) throw ContractError("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  const double t = pos - static_cast<double>(i);
  return values[i] + t * (values[i + 1] - values[i]);
}

CurveReport dataset_curve_report(std::vector<NamedPair> pairs) {
  if (pairs.empty()) throw ContractError("dataset_curve_report: no pairs");
  std::sort(pairs.begin(), pairs.end(),
            [](const NamedPair& x, const NamedPair& y) { return x.name < y.name; });
  CurveReport report;
  for (const auto& pair : pairs) {
    const CurveEstimate est = estimate_curve(pair.low, pair.ref);
    report.curves.push_back({pair.name, est.curve, curve_severity(est.curve), est.degenerate});
  }

  for (int p = 0; p <= 100; p += 10) {
    report.envelope_percentiles.push_back(p);
    ToneCurve::Lut lut{};
    for (int k = 0; k < ToneCurve::kSize; ++k) {
      std::vector<double> column;
      column.reserve(report.curves.size());
      for (const auto& e : report.curves) column.push_back(e.curve[k]);
      lut[static_cast<std::size_t>(k)] = percentile(std::move(column), p);
    }
    report.envelopes.push_back(lut);
  }

  constexpr int kSeverityBins = 16;
  double hi = 0.0;
  for (const auto& e : report.curves) hi = std::max(hi, e.severity);
  hi = hi > 0.0 ? hi : 1.0;
  for (int i = 0; i <= kSeverityBins; ++i) report.severity_edges.push_back(hi * i / kSeverityBins);
  report.severity_counts.assign(kSeverityBins, 0);
  for (const auto& e : report.curves) {
    const int bin = std::min(kSeverityBins - 1, static_cast<int>(e.severity / hi * kSeverityBins));
    ++report.severity_counts[static_cast<std::size_t>(bin)];
  }
  return report;
}

void save_curve_report(const CurveReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["curve_count"] = report.curves.size();
  auto& curves = j["curves"] = nlohmann::json::array();
  for (const auto& e : report.curves) {
    curves.push_back({{"name", e.name},
                      {"lut", e.curve.lut()},
                      {"severity", e.severity},
                      {"degenerate", e.degenerate}});
  }
  auto& env = j["envelopes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.envelopes.size(); ++i) {
    env.push_back({{"percentile", report.envelope_percentiles[i]},
                   {"lut", report.envelopes[i]}});
  }
  j["severity_histogram"] = {{"edges", report.severity_edges},
                             {"counts", report.severity_counts}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write curve report '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing curve report '" + path.string() + "'");
}

CurveReport dataset_curve_report(std::vector<NamedPair> pairs,
                                 const std::filesystem::path& out) {
  CurveReport report = dataset_curve_report(std::move(pairs));
  save_curve_report(report, out);
  return report;
}

}  // namespace lowlight
