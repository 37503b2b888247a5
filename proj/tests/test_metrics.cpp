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

#include "doctest.h"
#include "lowlight/errors.hpp"
#include "lowlight/metrics.hpp"
#include "test_util.hpp"

using namespace lowlight;

namespace {

// Direct 2-D windowed SSIM on luma, valid placements only.
double ssim_oracle(const ImageRGB& a, const ImageRGB& b) {
  const int n = 11;
  const double sigma = 1.5, c1 = 1e-4, c2 = 9e-4;
  double w2[11][11];
  double total = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double dx = i - 5, dy = j - 5;
      w2[j][i] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      total += w2[j][i];
    }
  }
  auto y = [](const ImageRGB& im, int x, int yy) {
    return 0.299 * im.at(0, x, yy) + 0.587 * im.at(1, x, yy) + 0.114 * im.at(2, x, yy);
  };
  double sum = 0;
  int count = 0;
  for (int y0 = 0; y0 + n <= a.height(); ++y0) {
    for (int x0 = 0; x0 + n <= a.width(); ++x0) {
      double mx = 0, my = 0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double w = w2[j][i] / total;
          mx += w * y(a, x0 + i, y0 + j);
          my += w * y(b, x0 + i, y0 + j);
        }
      }
      double vx = 0, vy = 0, cxy = 0;
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          const double w = w2[j][i] / total;
          const double dx = y(a, x0 + i, y0 + j) - mx, dy = y(b, x0 + i, y0 + j) - my;
          vx += w * dx * dx;
          vy += w * dy * dy;
          cxy += w * dx * dy;
        }
      }
      sum += (2 * mx * my + c1) / (mx * mx + my * my + c1) * (2 * cxy + c2) / (vx + vy + c2);
      ++count;
    }
  }
  return sum / count;
}

ImageRGB offset(const ImageRGB& img, double d) {
  ImageRGB out = img;
  for (int c = 0; c < 3; ++c) {
    for (double& v : out.channel(c).samples()) v += d;
  }
  return out;
}

}  // namespace

TEST_CASE("psnr") {
  const ImageRGB a = testutil::random_image(16, 16, 1, 0.2, 0.8);
  CHECK(psnr(a, a) == kPsnrIdentical);
  CHECK(psnr(offset(a, 0.1), a) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK_THROWS_AS(psnr(a, ImageRGB(16, 15)), ContractError);

  double prev = kPsnrIdentical;
  for (double sigma : {0.01, 0.03, 0.09}) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, sigma);
    ImageRGB noisy = a;
    for (int c = 0; c < 3; ++c) {
      for (double& v : noisy.channel(c).samples()) v += n(rng);
    }
    const double p = psnr(noisy, a);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("ssim against a direct oracle") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ImageRGB a = testutil::random_image(32, 32, 10 + s);
    const ImageRGB b = testutil::random_image(32, 32, 50 + s);
    CHECK(std::abs(ssim(a, b) - ssim_oracle(a, b)) < 1e-9);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const double closed = (2 * 0.24 + 1e-4) / (0.16 + 0.36 + 1e-4);
  CHECK(ssim(ImageRGB(16, 16, 0.4), ImageRGB(16, 16, 0.6)) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(std::abs(closed - 0.923092) < 1e-6);

  // Checkerboard vs. its complement.
  ImageRGB chk(24, 24);
  for (int y = 0; y < 24; ++y) {
    for (int x = 0; x < 24; ++x) {
      for (int c = 0; c < 3; ++c) chk.at(c, x, y) = (x + y) % 2 ? 0.8 : 0.2;
    }
  }
  ImageRGB inv = chk;
  for (int c = 0; c < 3; ++c) {
    for (double& v : inv.channel(c).samples()) v = 1.0 - v;
  }
  CHECK(ssim(chk, inv) < ssim(chk, chk));
  CHECK_THROWS_AS(ssim(ImageRGB(10, 20), ImageRGB(10, 20)), ContractError);
}

TEST_CASE("average brightness delta") {
  const ImageRGB a = testutil::random_image(12, 12, 2, 0.1, 0.8);
  const ImageRGB b = testutil::random_image(12, 12, 3, 0.1, 0.8);
  CHECK(average_brightness_delta(a, a) == 0.0);
  CHECK(average_brightness_delta(offset(a, 0.1), a) == doctest::Approx(25.5).epsilon(1e-9));
  CHECK(average_brightness_delta(a, b) == doctest::Approx(-average_brightness_delta(b, a)));
}

TEST_CASE("lightness order error") {
  // 50x50 image with distinct V values.
  ImageRGB img(50, 50);
  for (int y = 0; y < 50; ++y) {
    for (int x = 0; x < 50; ++x) {
      const double v = 0.05 + 0.9 * (y * 50 + x) / 2499.0;
      img.at(0, x, y) = v;
      img.at(1, x, y) = v * 0.5;
      img.at(2, x, y) = v * 0.25;
    }
  }
  CHECK(loe(img, img) == 0.0);
  ImageRGB toned = img;
  for (int c = 0; c < 3; ++c) {
    for (double& v : toned.channel(c).samples()) v = std::sqrt(v);
  }
  CHECK(loe(toned, img) == 0.0);
  ImageRGB inverted = img;
  for (int c = 0; c < 3; ++c) {
    for (double& v : inverted.channel(c).samples()) v = 1.0 - v;
  }
  // Inversion moves the max to the other channel, so use a gray copy.
  ImageRGB gray = img;
  gray.channel(1) = gray.channel(0);
  gray.channel(2) = gray.channel(0);
  ImageRGB gray_inv = gray;
  for (int c = 0; c < 3; ++c) {
    for (double& v : gray_inv.channel(c).samples()) v = 1.0 - v;
  }
  CHECK(loe(gray_inv, gray) == doctest::Approx(1000.0));
  CHECK(loe(inverted, img) > 0.0);
  CHECK_THROWS_AS(loe(img, ImageRGB(4, 4)), ContractError);
}

TEST_CASE("bright loss asymmetry") {
  const ImageRGB t = testutil::random_image(10, 10, 6, 0.2, 0.8);
  CHECK(bright_loss(t, t) == 0.0);
  CHECK(bright_loss(offset(t, -0.1), t, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bright_loss(offset(t, 0.1), t, 10.0) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("structural and regional losses") {
  const ImageRGB p = testutil::random_image(24, 24, 7);
  const ImageRGB t = testutil::random_image(24, 24, 8);
  CHECK(structural_loss(t, t) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(structural_loss(ImageRGB(16, 16, 0.4), ImageRGB(16, 16, 0.6)) ==
        doctest::Approx(0.0768).epsilon(1e-3));
  const double sl = structural_loss(p, t);
  CHECK(sl >= 0.0);
  CHECK(sl <= 2.0);

  const SupervisionMap ones(24, 24, 1.0), zeros(24, 24, 0.0);
  CHECK(regional_loss(t, t, ones) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(regional_loss(p, t, zeros) == 0.0);
  CHECK(std::abs(regional_loss(p, t, ones) - (mae(p, t) + structural_loss(p, t))) < 1e-9);
}

TEST_CASE("map losses") {
  const SupervisionMap a(8, 8, 0.2), b(8, 8, 0.5);
  CHECK(map_l2(a, a) == 0.0);
  CHECK(map_l2(a, b) == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(map_l1(a, b) == doctest::Approx(0.3).epsilon(1e-12));
  Plane r1(8, 8), r2(8, 8);
  std::mt19937_64 rng(2);
  for (std::size_t i = 0; i < 64; ++i) {
    r1[i] = testutil::unit(rng);
    r2[i] = testutil::unit(rng);
  }
  CHECK(map_l2(SupervisionMap(r1), SupervisionMap(r2)) <= map_l1(SupervisionMap(r1), SupervisionMap(r2)));
  CHECK_THROWS_AS(map_l1(a, SupervisionMap(4, 4)), ContractError);
}

TEST_CASE("composite loss") {
  const ImageRGB p = testutil::random_image(20, 20, 11);
  const ImageRGB t = testutil::random_image(20, 20, 12);
  Plane att_plane(20, 20);
  std::mt19937_64 rng(13);
  for (double& v : att_plane.samples()) v = testutil::unit(rng);
  const SupervisionMap att(att_plane);

  CHECK(composite_loss(t, t, att) == doctest::Approx(0.0).epsilon(1e-12));
  LossWeights zero{0, 0, 0, 0, 10};
  CHECK(composite_loss(p, t, att, zero) == 0.0);

  const LossWeights w;
  const double hand = 1.0 * bright_loss(p, t, 10) + 1.0 * structural_loss(p, t) +
                      5.0 * regional_loss(p, t, att);
  CHECK(std::abs(composite_loss(p, t, att, w) - hand) < 1e-9);
  CHECK(composite_loss(p, t, att, w) >= 5.0 * regional_loss(p, t, att));

  LossWeights bad;
  bad.lambda = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("evaluate report") {
  const ImageRGB p = testutil::random_image(20, 20, 14);
  const ImageRGB t = testutil::random_image(20, 20, 15);
  const QualityReport none = evaluate(p, t, nullptr);
  CHECK_FALSE(none.regional_loss.has_value());
  CHECK_FALSE(none.composite.has_value());
  CHECK(none.structural_loss == doctest::Approx(1.0 - none.ssim));
  const SupervisionMap att(20, 20, 0.5);
  const QualityReport full = evaluate(p, t, &att);
  REQUIRE(full.composite.has_value());
  CHECK(*full.composite == doctest::Approx(composite_loss(p, t, att)).epsilon(1e-12));
  const QualityReport same = evaluate(t, t, &att);
  CHECK(same.psnr == kPsnrIdentical);
  CHECK(same.loe == 0.0);
  CHECK(*same.composite == doctest::Approx(0.0).epsilon(1e-12));
}
