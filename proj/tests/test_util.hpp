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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "lowlight/image.hpp"

namespace testutil {

inline double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline lowlight::ImageRGB random_image(int w, int h, std::uint64_t seed, double lo = 0.0,
                                       double hi = 1.0) {
  std::mt19937_64 rng(seed);
  lowlight::ImageRGB img(w, h);
  for (int c = 0; c < 3; ++c) {
    for (double& v : img.channel(c).samples()) v = lo + (hi - lo) * unit(rng);
  }
  return img;
}

// Smooth random field: a few random sinusoids per channel, in [lo, hi].
inline lowlight::ImageRGB smooth_image(int w, int h, std::uint64_t seed, double lo = 0.0,
                                       double hi = 1.0) {
  std::mt19937_64 rng(seed);
  lowlight::ImageRGB img(w, h);
  for (int c = 0; c < 3; ++c) {
    double fx[3], fy[3], ph[3];
    for (int k = 0; k < 3; ++k) {
      fx[k] = 0.5 + 3.0 * unit(rng);
      fy[k] = 0.5 + 3.0 * unit(rng);
      ph[k] = 6.283185307179586 * unit(rng);
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int k = 0; k < 3; ++k) {
          s += std::sin(6.283185307179586 * (fx[k] * x / w + fy[k] * y / h) + ph[k]);
        }
        img.at(c, x, y) = lo + (hi - lo) * (0.5 + s / 6.0);
      }
    }
  }
  return img;
}

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lowlight_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
