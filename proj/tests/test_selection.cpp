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

#include <map>
#include <set>

#include "doctest.h"
#include "lowlight/errors.hpp"
#include "lowlight/io.hpp"
#include "lowlight/selection.hpp"
#include "test_util.hpp"

using namespace lowlight;

namespace {

// Brute-force Laplacian variance with replicate border, 0-255 luma.
double laplacian_variance_oracle(const ImageRGB& img) {
  const int w = img.width(), h = img.height();
  auto y = [&](int x, int yy) {
    x = std::clamp(x, 0, w - 1);
    yy = std::clamp(yy, 0, h - 1);
    return 255.0 * (0.299 * img.at(0, x, yy) + 0.587 * img.at(1, x, yy) + 0.114 * img.at(2, x, yy));
  };
  std::vector<double> r;
  for (int yy = 0; yy < h; ++yy) {
    for (int x = 0; x < w; ++x) {
      r.push_back(y(x - 1, yy) + y(x + 1, yy) + y(x, yy - 1) + y(x, yy + 1) - 4 * y(x, yy));
    }
  }
  double mean = 0;
  for (double v : r) mean += v;
  mean /= static_cast<double>(r.size());
  double var = 0;
  for (double v : r) var += (v - mean) * (v - mean);
  return var / static_cast<double>(r.size());
}

ImageRGB box_blur(const ImageRGB& src, int radius) {
  ImageRGB out = src;
  const int w = src.width(), h = src.height();
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        int n = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            s += src.at(c, std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1));
            ++n;
          }
        }
        out.at(c, x, y) = s / n;
      }
    }
  }
  return out;
}

// Saturated color chart with hard edges.
ImageRGB chart(int w, int h) {
  const double palette[6][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                                {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  ImageRGB img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int k = ((x / 8) + 2 * (y / 8)) % 6;
      for (int c = 0; c < 3; ++c) img.at(c, x, y) = 0.15 + 0.85 * palette[k][c];
    }
  }
  return img;
}

std::map<int, int> region_sizes(const LabelMap& m) {
  std::map<int, int> sizes;
  for (auto l : m.labels) ++sizes[l];
  return sizes;
}

bool regions_connected(const LabelMap& m) {
  std::vector<int> seen(m.labels.size(), 0);
  std::set<int> done;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y * m.width + x);
      if (seen[i]) continue;
      const int label = m.labels[i];
      if (!done.insert(label).second) return false;  // second component
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen[i] = 1;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = cx + dx[k], ny = cy + dy[k];
          if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) continue;
          const std::size_t j = static_cast<std::size_t>(ny * m.width + nx);
          if (!seen[j] && m.labels[j] == label) {
            seen[j] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("oversegment on a constant image forms a near grid") {
  const LabelMap m = oversegment(ImageRGB(128, 96, 0.4), 32);
  CHECK(m.region_count == 12);
  for (auto [label, size] : region_sizes(m)) {
    CHECK(size >= 512);
    CHECK(size <= 2048);
  }
  CHECK(regions_connected(m));
}

TEST_CASE("oversegment degenerate sizes") {
  CHECK(oversegment(ImageRGB(32, 32, 0.4), 32).region_count == 1);
  const LabelMap tiny = oversegment(ImageRGB(10, 7, 0.2), 32);
  CHECK(tiny.region_count == 1);
  for (auto l : tiny.labels) CHECK(l == 0);
  CHECK_THROWS_AS(oversegment(ImageRGB(64, 64, 0.4), 3), ContractError);
}

TEST_CASE("oversegment follows a tone edge") {
  // Edge at x = 45, away from the seed grid lines at 32 and 64.
  const int edge = 45;
  ImageRGB img(128, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 128; ++x) {
      const bool left = x < edge;
      img.at(0, x, y) = left ? 0.9 : 0.1;
      img.at(1, x, y) = left ? 0.2 : 0.7;
      img.at(2, x, y) = left ? 0.1 : 0.8;
    }
  }
  const LabelMap m = oversegment(img, 32);
  CHECK(regions_connected(m));
  // Boundary offset: every region is single-tone apart from pixels within 2 px of the edge.
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 128; ++x) {
      if (std::abs(x - edge) <= 2) continue;
      const int lbl = m.at(x, y);
      for (int yy = 0; yy < 64; ++yy) {
        for (int xx = 0; xx < 128; ++xx) {
          if (m.at(xx, yy) != lbl || std::abs(xx - edge) <= 2) continue;
          if ((xx < edge) != (x < edge)) {
            FAIL("region straddles the edge");
          }
        }
      }
      x += 7;  // sample a subset of anchors
    }
    y += 7;
  }
}

TEST_CASE("random image segmentation is total and connected") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ImageRGB img = testutil::random_image(70, 50, seed);
    const LabelMap m = oversegment(img, 16);
    CHECK(m.labels.size() == 70u * 50u);
    for (auto l : m.labels) {
      CHECK(l >= 0);
      CHECK(l < m.region_count);
    }
    CHECK(region_sizes(m).size() == static_cast<std::size_t>(m.region_count));
    CHECK(regions_connected(m));
  }
}

TEST_CASE("darkness estimate") {
  SelectionConfig cfg;
  const ImageRGB black(96, 64, 0.0);
  CHECK(darkness_estimate(black, oversegment(black, 32), cfg) == 0.0);
  const ImageRGB white(96, 64, 1.0);
  CHECK(darkness_estimate(white, oversegment(white, 32), cfg) == 1.0);

  // Ten region-aligned columns of 32 px, one of them black.
  ImageRGB mixed(320, 32, 1.0);
  for (int y = 0; y < 32; ++y) {
    for (int x = 288; x < 320; ++x) {
      for (int c = 0; c < 3; ++c) mixed.at(c, x, y) = 0.0;
    }
  }
  const double f = darkness_estimate(mixed, oversegment(mixed, 32), cfg);
  CHECK(f == doctest::Approx(0.9));
  CHECK(f > cfg.bright_fraction_thresh);

  CHECK_THROWS_AS(darkness_estimate(white, oversegment(ImageRGB(64, 64, 0.0), 16), cfg), ContractError);
}

TEST_CASE("darkness estimate rule switch") {
  // Dim textured block: low mean, high variance.
  SelectionConfig cfg;
  ImageRGB img(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      for (int c = 0; c < 3; ++c) img.at(c, x, y) = (x + y) % 2 ? 0.3 : 0.0;
    }
  }
  const LabelMap m = oversegment(img, 32);
  CHECK(darkness_estimate(img, m, cfg) == 1.0);
  cfg.exposure_rule = ExposureRule::kMeanAndVariance;
  CHECK(darkness_estimate(img, m, cfg) == 0.0);
}

TEST_CASE("darkness estimate is monotone under global brightening") {
  SelectionConfig cfg;
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const ImageRGB img = testutil::smooth_image(96, 64, seed, 0.0, 0.5);
    const LabelMap m = oversegment(img, 16);
    const double base = darkness_estimate(img, m, cfg);
    for (double c : {0.05, 0.2, 0.4}) {
      ImageRGB brighter = img;
      for (int ch = 0; ch < 3; ++ch) {
        for (double& v : brighter.channel(ch).samples()) v = std::min(v + c, 1.0);
      }
      CHECK(darkness_estimate(brighter, m, cfg) >= base);
    }
  }
}

TEST_CASE("blur estimate") {
  CHECK(blur_estimate(ImageRGB(9, 9, 0.7)) == 0.0);

  ImageRGB dot(5, 5, 0.0);
  for (int c = 0; c < 3; ++c) dot.at(c, 2, 2) = 1.0;
  const double oracle = laplacian_variance_oracle(dot);
  CHECK(blur_estimate(dot) == doctest::Approx(oracle).epsilon(1e-12));
  // Response: -1020 at the dot, 255 at four neighbours, mean 0.
  CHECK(oracle == doctest::Approx((1020.0 * 1020.0 + 4 * 255.0 * 255.0) / 25.0));

  const ImageRGB rnd = testutil::random_image(23, 19, 4);
  CHECK(blur_estimate(rnd) == doctest::Approx(laplacian_variance_oracle(rnd)).epsilon(1e-12));

  const ImageRGB sharp = chart(96, 64);
  CHECK(blur_estimate(sharp) > blur_estimate(box_blur(sharp, 3)));
}

TEST_CASE("blur estimate drops under box blur across the corpus") {
  const std::filesystem::path corpus = LOWLIGHT_TEST_DATA "/corpus";
  int checked = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(corpus)) {
    if (e.path().extension() != ".png") continue;
    const ImageRGB img = load_image(e.path());
    const double base = blur_estimate(img);
    for (int r : {3, 5}) CHECK(blur_estimate(box_blur(img, r)) <= base);
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("colorfulness closed forms") {
  CHECK(colorfulness(testutil::smooth_image(16, 16, 3)) > 0.0);
  ImageRGB gray(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      for (int c = 0; c < 3; ++c) gray.at(c, x, y) = (x * 16 + y) / 256.0;
    }
  }
  CHECK(colorfulness(gray) == doctest::Approx(0.0));

  ImageRGB rg(2, 1);
  rg.at(0, 0, 0) = 1.0;
  rg.at(1, 1, 0) = 1.0;
  CHECK(colorfulness(rg) == doctest::Approx(255.0 + 0.3 * 127.5).epsilon(1e-12));

  const ImageRGB red(4, 4, 1.0, 0.0, 0.0);
  CHECK(colorfulness(red) == doctest::Approx(0.3 * std::hypot(255.0, 127.5)).epsilon(1e-12));
}

TEST_CASE("colorfulness ignores a uniform brightness offset") {
  const ImageRGB img = testutil::random_image(20, 20, 8, 0.2, 0.7);
  ImageRGB shifted = img;
  for (int c = 0; c < 3; ++c) {
    for (double& v : shifted.channel(c).samples()) v += 0.2;
  }
  CHECK(colorfulness(shifted) == doctest::Approx(colorfulness(img)).epsilon(1e-9));
}

TEST_CASE("select verdicts") {
  const SelectionReport black = select(ImageRGB(96, 64, 0.0));
  CHECK_FALSE(black.darkness_pass);
  CHECK_FALSE(black.selected);

  const SelectionReport good = select(chart(160, 120));
  CHECK(good.darkness_pass);
  CHECK(good.blur_pass);
  CHECK(good.color_pass);
  CHECK(good.selected);

  // Blur the chart until the Laplacian variance falls under the threshold.
  ImageRGB blurred = chart(160, 120);
  int rounds = 0;
  while (blur_estimate(blurred) >= SelectionConfig{}.blur_thresh && rounds < 20) {
    blurred = box_blur(blurred, 1);
    ++rounds;
  }
  const SelectionReport soft = select(blurred);
  CHECK_FALSE(soft.blur_pass);
  CHECK_FALSE(soft.selected);
}

TEST_CASE("select conjunction invariant on random images") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const ImageRGB img = seed % 2 ? testutil::random_image(48, 40, seed, 0.0, 0.2 + 0.07 * seed)
                                  : testutil::smooth_image(48, 40, seed);
    const SelectionReport r = select(img);
    CHECK(r.selected == (r.darkness_pass && r.blur_pass && r.color_pass));
    CHECK(r.bright_fraction >= 0.0);
    CHECK(r.bright_fraction <= 1.0);
    CHECK(r.blur_variance >= 0.0);
    CHECK(r.colorfulness >= 0.0);
  }
}

TEST_CASE("selection config validation") {
  SelectionConfig cfg;
  cfg.bright_fraction_thresh = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.blur_thresh = -1;
  CHECK_THROWS_AS(select(ImageRGB(32, 32, 0.5), cfg), ConfigError);
  cfg = {};
  cfg.segment_size = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
