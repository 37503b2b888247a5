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

#include "lowlight/supervision.hpp"

#include <algorithm>
#include <cmath>

#include "lowlight/io.hpp"

namespace lowlight {
namespace {

Plane clamped(Plane plane) {
  for (double& v : plane.samples()) {
    v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
  }
  return plane;
}

}  // namespace

SupervisionMap::SupervisionMap(Plane plane) : plane_(clamped(std::move(plane))) {}

SupervisionMap::SupervisionMap(int width, int height, double fill)
    : plane_(clamped(Plane(width, height, fill))) {}

SupervisionMap ue_attention_map(const ImageRGB& bright, const ImageRGB& dark) {
  require_same_shape(bright, dark, "ue_attention_map");
  const Plane m_bright = value_plane(bright);
  const Plane m_dark = value_plane(dark);
  Plane a(bright.width(), bright.height());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double m = m_bright[i];
    a[i] = m < kSupervisionEpsilon ? 0.0 : std::abs(m - m_dark[i]) / m;
  }
  return SupervisionMap(std::move(a));
}

SupervisionMap noise_map(const ImageRGB& noisy, const ImageRGB& clean_dark) {
  require_same_shape(noisy, clean_dark, "noise_map");
  Plane n(noisy.width(), noisy.height(), 0.0);
  for (int c = 0; c < 3; ++c) {
    const auto fn = noisy.channel(c).samples();
    const auto f = clean_dark.channel(c).samples();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double ratio = std::abs(fn[i] - f[i]) / std::max(f[i], kSupervisionEpsilon);
      n[i] = std::max(n[i], ratio);
    }
  }
  return SupervisionMap(std::move(n));
}

void save_map(const SupervisionMap& map, const std::filesystem::path& path) {
  save_gray(map.plane(), path, 16);
}

SupervisionMap load_map(const std::filesystem::path& path) {
  return SupervisionMap(load_gray(path));
}

}  // namespace lowlight
