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

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "lowlight/image.hpp"

namespace lowlight {

// 256-entry non-decreasing lookup table on [0,1]; entry k is the output for
// input k/255, linearly interpolated in between.
class ToneCurve {
 public:
  static constexpr int kSize = 256;
  using Lut = std::array<double, kSize>;

  ToneCurve() : ToneCurve(identity()) {}
  // Throws ContractError unless monotone non-decreasing within [0,1].
  explicit ToneCurve(const Lut& lut);

  static ToneCurve identity();
  template <typename Fn>
  static ToneCurve from_function(Fn fn) {
    Lut lut{};
    for (int k = 0; k < kSize; ++k) lut[static_cast<std::size_t>(k)] = fn(k / 255.0);
    return ToneCurve(lut);
  }

  const Lut& lut() const { return lut_; }
  double operator[](int k) const { return lut_[static_cast<std::size_t>(k)]; }
  double evaluate(double v) const;

 private:
  Lut lut_{};
};

struct CurveEstimate {
  ToneCurve curve;
  // Low image has a single populated V level; the curve is interpolated.
  bool degenerate = false;
};

// Histogram matching of V planes: lut[k] = G^-1(F(k/255)) with G^-1 the
// left-continuous inverse. Bins the low image never hits are linearly
// interpolated between populated neighbours (and the endpoints).
CurveEstimate estimate_curve(const ImageRGB& low, const ImageRGB& ref);

// Maps V through the curve and rescales RGB by V'/V (gray V' where V ~ 0).
ImageRGB apply_curve(const ImageRGB& image, const ToneCurve& curve);

// Max slope over [0, 0.5] of the piecewise-linear curve; identity is 1.
double curve_severity(const ToneCurve& curve);

// Wasserstein-1 distance between two [0,1] sample distributions, from
// 256-bin histograms (sum of |CDF difference| times bin width).
double wasserstein1(const Plane& a, const Plane& b, int bins = 256);

struct NamedPair {
  std::string name;
  ImageRGB low;
  ImageRGB ref;
};

struct CurveEntry {
  std::string name;
  ToneCurve curve;
  double severity = 0.0;
  bool degenerate = false;
};

struct CurveReport {
  std::vector<CurveEntry> curves;     // sorted by name
  std::vector<int> envelope_percentiles;  // 0, 10, ..., 100
  std::vector<ToneCurve::Lut> envelopes;  // one lut per percentile
  std::vector<double> severity_edges;     // histogram bin edges
  std::vector<int> severity_counts;
};

// Throws ContractError on an empty input.
CurveReport dataset_curve_report(std::vector<NamedPair> pairs);
void save_curve_report(const CurveReport& report, const std::filesystem::path& path);
CurveReport dataset_curve_report(std::vector<NamedPair> pairs,
                                 const std::filesystem::path& out);

// Linear-interpolated percentile (0..100) of unsorted values.
double percentile(std::vector<double> values, double pct);

}  // namespace lowlight
