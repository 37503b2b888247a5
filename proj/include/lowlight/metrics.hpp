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

#include <limits>
#include <optional>

#include "lowlight/image.hpp"
#include "lowlight/supervision.hpp"

namespace lowlight {

struct SsimParams {
  int window = 11;        // Gaussian window side
  double sigma = 1.5;
  double dynamic_range = 1.0;
  double k1 = 0.01;
  double k2 = 0.03;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

struct LossWeights {
  double w_eb = 1.0;   // bright
  double w_es = 1.0;   // structural
  double w_ep = 0.35;  // perceptual; carried for completeness, not evaluated
  double w_er = 5.0;   // regional
  double lambda = 10.0;

  void validate() const;
};

struct QualityReport {
  double psnr = 0.0;
  double ssim = 0.0;
  double ab = 0.0;
  double loe = 0.0;
  double bright_loss = 0.0;
  double structural_loss = 0.0;
  // Absent when no attention map was supplied.
  std::optional<double> regional_loss;
  std::optional<double> composite;
};

inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

// 10 log10(1/MSE) over all samples; +inf for identical inputs.
double psnr(const ImageRGB& a, const ImageRGB& b);

// Mean SSIM over all valid window placements on luma. Throws ContractError
// if the images differ in size or are smaller than the window.
double ssim(const ImageRGB& a, const ImageRGB& b, const SsimParams& p = {});
double ssim(const Plane& a, const Plane& b, const SsimParams& p = {});

// 255 * (mean luma(a) - mean luma(b)).
double average_brightness_delta(const ImageRGB& a, const ImageRGB& b);

// Lightness order error on a grid x grid subsample of the V planes:
// 1000 * fraction of ordered pixel pairs whose order relation flipped.
double loe(const ImageRGB& enhanced, const ImageRGB& original, int grid = 50);

double mae(const ImageRGB& a, const ImageRGB& b);

// Mean of S(pred - target), S(x) = x for x >= 0 and -lambda*x otherwise.
double bright_loss(const ImageRGB& pred, const ImageRGB& target, double lambda = 10.0);

double structural_loss(const ImageRGB& pred, const ImageRGB& target,
                       const SsimParams& p = {});

// mae(pred*A, target*A) + structural_loss(pred*A, target*A).
double regional_loss(const ImageRGB& pred, const ImageRGB& target,
                     const SupervisionMap& attention, const SsimParams& p = {});

double map_l2(const SupervisionMap& a, const SupervisionMap& b);
double map_l1(const SupervisionMap& a, const SupervisionMap& b);

// w_eb*bright + w_es*structural + w_er*regional. The perceptual (VGG)
// term of the full enhancement loss is not part of this sum.
double composite_loss(const ImageRGB& pred, const ImageRGB& target,
                      const SupervisionMap& attention, const LossWeights& w = {});

// Every measure; regional and composite need the attention map.
QualityReport evaluate(const ImageRGB& pred, const ImageRGB& ref,
                       const SupervisionMap* attention, const LossWeights& w = {});

}  // namespace lowlight
