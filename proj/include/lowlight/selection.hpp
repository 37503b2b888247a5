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
#include <vector>

#include "lowlight/image.hpp"

namespace lowlight {

// How per-region V mean and variance combine into "sufficiently exposed".
enum class ExposureRule { kMeanOrVariance, kMeanAndVariance };

struct SelectionConfig {
  int segment_size = 32;            // target superpixel side, pixels
  double compactness = 10.0;        // SLIC spatial weight m
  int slic_iterations = 10;
  double block_mean_thresh = 0.35;  // V mean, [0,1]
  double block_var_thresh = 0.001;  // V variance, [0,1]^2
  ExposureRule exposure_rule = ExposureRule::kMeanOrVariance;
  double bright_fraction_thresh = 0.85;
  double blur_thresh = 500.0;   // Laplacian variance on the 0-255 scale
  double color_thresh = 40.0;   // Hasler-Suesstrunk colorfulness, 0-255 scale

  // Throws ConfigError when a threshold is negative or out of range.
  void validate() const;
};

struct SelectionReport {
  double bright_fraction = 0.0;
  double blur_variance = 0.0;
  double colorfulness = 0.0;
  bool darkness_pass = false;
  bool blur_pass = false;
  bool color_pass = false;
  bool selected = false;
};

// Superpixel labels, one id per pixel in [0, region_count).
struct LabelMap {
  int width = 0;
  int height = 0;
  int region_count = 0;
  std::vector<std::int32_t> labels;

  std::int32_t at(int x, int y) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

// SLIC superpixels in (L, a, b, x, y). Every returned region is a single
// 4-connected component. segment_size must be >= 4; larger than the image
// collapses to one region.
LabelMap oversegment(const ImageRGB& image, int segment_size,
                     double compactness = 10.0, int iterations = 10);

// Fraction of superpixels whose V statistics clear the exposure thresholds.
double darkness_estimate(const ImageRGB& image, const LabelMap& labels,
                         const SelectionConfig& cfg);

// Population variance of the 3x3 Laplacian of luma*255, replicate border.
double blur_estimate(const ImageRGB& image);

// sqrt(var_rg + var_yb) + 0.3 * sqrt(mean_rg^2 + mean_yb^2) on 0-255.
double colorfulness(const ImageRGB& image);

SelectionReport select(const ImageRGB& image, const SelectionConfig& cfg = {});

}  // namespace lowlight
