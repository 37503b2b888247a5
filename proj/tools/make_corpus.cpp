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

// Writes the deterministic test corpus: colorful sharp scenes plus a few
// images that selection must reject (dark, gray, blurred).
//
//   make_corpus <output_dir>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "lowlight/image.hpp"
#include "lowlight/io.hpp"

namespace fs = std::filesystem;
using lowlight::ImageRGB;

namespace {

constexpr int kWidth = 160;
constexpr int kHeight = 120;

// Explicit conversion keeps the corpus independent of <random> distributions.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  const double c = v * s;
  const double hp = std::fmod(h, 1.0) * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  rgb[0] = r + m;
  rgb[1] = g + m;
  rgb[2] = b + m;
}

ImageRGB scene(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageRGB img(kWidth, kHeight, 0.0);
  const double hue0 = unit(rng);
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) {
      double rgb[3];
      hsv_to_rgb(hue0 + 0.3 * x / kWidth, 0.5, 0.6 + 0.3 * y / kHeight, rgb);
      for (int c = 0; c < 3; ++c) img.at(c, x, y) = rgb[c];
    }
  }
  const int shapes = 14 + static_cast<int>(rng() % 8);
  for (int s = 0; s < shapes; ++s) {
    double rgb[3];
    hsv_to_rgb(unit(rng), 0.6 + 0.4 * unit(rng), 0.45 + 0.55 * unit(rng), rgb);
    const int cx = static_cast<int>(rng() % kWidth);
    const int cy = static_cast<int>(rng() % kHeight);
    const int r = 6 + static_cast<int>(rng() % 22);
    const bool disc = rng() % 2 == 0;
    for (int y = std::max(0, cy - r); y < std::min(kHeight, cy + r); ++y) {
      for (int x = std::max(0, cx - r); x < std::min(kWidth, cx + r); ++x) {
        if (disc && (x - cx) * (x - cx) + (y - cy) * (y - cy) > r * r) continue;
        for (int c = 0; c < 3; ++c) img.at(c, x, y) = rgb[c];
      }
    }
  }
  // Fine stripes give every scene sharp texture.
  const int period = 3 + static_cast<int>(rng() % 3);
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) {
      const double d = ((x + y) / period) % 2 == 0 ? 0.08 : -0.08;
      for (int c = 0; c < 3; ++c) img.at(c, x, y) += d;
    }
  }
  img.clamp();
  return img;
}

ImageRGB box_blur(const ImageRGB& src, int radius, int passes) {
  ImageRGB cur = src;
  for (int p = 0; p < passes; ++p) {
    ImageRGB next = cur;
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < kHeight; ++y) {
        for (int x = 0; x < kWidth; ++x) {
          double sum = 0;
          int n = 0;
          for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
              const int xx = std::clamp(x + dx, 0, kWidth - 1);
              const int yy = std::clamp(y + dy, 0, kHeight - 1);
              sum += cur.at(c, xx, yy);
              ++n;
            }
          }
          next.at(c, x, y) = sum / n;
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_corpus <output_dir>\n";
    return 2;
  }
  const fs::path out = argv[1];
  fs::create_directories(out / "outdoor");
  int index = 0;
  auto path_for = [&](const std::string& name) {
    // Half the corpus lives in a subdirectory to exercise recursive scans.
    const fs::path dir = index++ % 2 == 0 ? out : out / "outdoor";
    return dir / (name + ".png");
  };

  for (int i = 0; i < 16; ++i) {
    const std::string name = "scene_" + std::to_string(100 + i).substr(1);
    lowlight::save_image(scene(1000 + static_cast<std::uint64_t>(i)), path_for(name), 8);
  }
  ImageRGB dark = scene(2000);
  for (int c = 0; c < 3; ++c) {
    for (double& v : dark.channel(c).samples()) v *= 0.12;
  }
  lowlight::save_image(dark, path_for("reject_dark"), 8);

  ImageRGB gray = scene(2001);
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) {
      const double l = lowlight::luma(gray.at(0, x, y), gray.at(1, x, y), gray.at(2, x, y));
      for (int c = 0; c < 3; ++c) gray.at(c, x, y) = l;
    }
  }
  lowlight::save_image(gray, path_for("reject_gray"), 8);
  lowlight::save_image(box_blur(scene(2002), 3, 3), path_for("reject_blurry"), 8);
  lowlight::save_image(box_blur(scene(2003), 4, 2), path_for("reject_soft"), 8);

  // Sidecar annotation copied verbatim by the pipeline.
  std::ofstream(out / "scene_00.txt") << "label: synthetic scene 0\n";
  return 0;
}
