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

#include <filesystem>

#include "lowlight/image.hpp"

namespace lowlight {

// Single-channel guidance raster; samples are clamped to [0,1] on entry.
class SupervisionMap {
 public:
  SupervisionMap() = default;
  explicit SupervisionMap(Plane plane);
  SupervisionMap(int width, int height, double fill = 0.0);

  int width() const { return plane_.width(); }
  int height() const { return plane_.height(); }
  double operator[](std::size_t i) const { return plane_[i]; }
  double at(int x, int y) const { return plane_.at(x, y); }
  const Plane& plane() const { return plane_; }

 private:
  Plane plane_;
};

// Below this, a source max-channel value counts as black.
inline constexpr double kSupervisionEpsilon = 1e-4;

// A = |max_c(I) - max_c(F(I))| / max_c(I); A = 0 where max_c(I) < eps.
SupervisionMap ue_attention_map(const ImageRGB& bright, const ImageRGB& dark);

// N = max_c(|F_n - F| / max(F, eps)), clamped to [0,1].
SupervisionMap noise_map(const ImageRGB& noisy, const ImageRGB& clean_dark);

// 16-bit grayscale PNG, code = round(sample * 65535).
void save_map(const SupervisionMap& map, const std::filesystem::path& path);
SupervisionMap load_map(const std::filesystem::path& path);

}  // namespace lowlight
