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

#include "lowlight/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {
namespace {

int mirror(int i, int n) {
  if (n == 1) return 0;
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

ImageRGB pad_to_even(const ImageRGB& image) {
  const int w = image.width() + (image.width() % 2);
  const int h = image.height() + (image.height() % 2);
  if (w == image.width() && h == image.height()) return image;
  ImageRGB out(w, h);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out.at(c, x, y) = image.at(c, mirror(x, image.width()),
                                   mirror(y, image.height()));
      }
    }
  }
  return out;
}

ImageRGB crop(const ImageRGB& image, int w, int h) {
  if (image.width() == w && image.height() == h) return image;
  ImageRGB out(w, h);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) out.at(c, x, y) = image.at(c, x, y);
    }
  }
  return out;
}

template <typename Fn>
Plane map_plane(const Plane& plane, Fn fn) {
  Plane out(plane.width(), plane.height());
  for (std::size_t i = 0; i < plane.size(); ++i) out[i] = fn(plane[i]);
  return out;
}

}  // namespace

bool SimulationParams::in_sampling_range() const {
  return alpha >= kAlphaMin && alpha <= kAlphaMax && beta >= kBetaMin &&
         beta <= kBetaMax && gamma >= kGammaMin && gamma <= kGammaMax;
}

Crf Crf::srgb() { return Crf{}; }

Crf Crf::from_table(std::vector<double> table) {
  if (table.size() != kTableSize) {
    throw ConfigError("CRF table must have " + std::to_string(kTableSize) +
                      " entries, got " + std::to_string(table.size()));
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i] >= 0.0 && table[i] <= 1.0)) {
      throw ConfigError("CRF table entry " + std::to_string(i) +
                        " outside [0,1]");
    }
    if (i > 0 && !(table[i] > table[i - 1])) {
      throw ConfigError("CRF table is not strictly increasing at entry " +
                        std::to_string(i) + "; curve is not invertible");
    }
  }
  Crf crf;
  crf.table_ = std::move(table);
  return crf;
}

double Crf::apply(double linear) const {
  const double x = std::clamp(linear, 0.0, 1.0);
  if (is_srgb()) {
    if (x >= 1.0) return 1.0;
    const double y = x <= 0.0031308 ? 12.92 * x
                                    : 1.055 * std::pow(x, 1.0 / 2.4) - 0.055;
    return std::clamp(y, 0.0, 1.0);
  }
  const double pos = x * static_cast<double>(table_.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(pos), table_.size() - 2);
  const double t = pos - static_cast<double>(i);
  return table_[i] + t * (table_[i + 1] - table_[i]);
}

double Crf::invert(double encoded) const {
  if (is_srgb()) {
    const double y = std::clamp(encoded, 0.0, 1.0);
    if (y >= 1.0) return 1.0;
    return y <= 0.04045 ? y / 12.92 : std::pow((y + 0.055) / 1.055, 2.4);
  }
  const double y = std::clamp(encoded, table_.front(), table_.back());
  const auto upper = std::upper_bound(table_.begin(), table_.end(), y);
  std::size_t i = upper == table_.begin()
                      ? 0
                      : static_cast<std::size_t>(upper - table_.begin()) - 1;
  i = std::min(i, table_.size() - 2);
  const double t = (y - table_[i]) / (table_[i + 1] - table_[i]);
  return (static_cast<double>(i) + t) / static_cast<double>(table_.size() - 1);
}

Plane crf_apply(const Plane& plane, const Crf& crf) {
  return map_plane(plane, [&](double v) { return crf.apply(v); });
}

Plane crf_invert(const Plane& plane, const Crf& crf) {
  return map_plane(plane, [&](double v) { return crf.invert(v); });
}

ImageRGB crf_apply(const ImageRGB& image, const Crf& crf) {
  return ImageRGB(crf_apply(image.channel(0), crf),
                  crf_apply(image.channel(1), crf),
                  crf_apply(image.channel(2), crf));
}

ImageRGB crf_invert(const ImageRGB& image, const Crf& crf) {
  return ImageRGB(crf_invert(image.channel(0), crf),
                  crf_invert(image.channel(1), crf),
                  crf_invert(image.channel(2), crf));
}

std::string_view to_string(BayerPattern pattern) {
  switch (pattern) {
    case BayerPattern::kRGGB: return "RGGB";
    case BayerPattern::kBGGR: return "BGGR";
    case BayerPattern::kGRBG: return "GRBG";
    case BayerPattern::kGBRG: return "GBRG";
  }
  return "RGGB";
}

BayerPattern parse_bayer_pattern(std::string_view name) {
  for (BayerPattern p : {BayerPattern::kRGGB, BayerPattern::kBGGR,
                         BayerPattern::kGRBG, BayerPattern::kGBRG}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown Bayer pattern '" + std::string(name) + "'");
}

int bayer_channel(BayerPattern pattern, int x, int y) {
  // Channel layout of the 2x2 tile, row-major: (0,0) (1,0) (0,1) (1,1).
  static constexpr int kTiles[4][4] = {
      {0, 1, 1, 2},  // RGGB
      {2, 1, 1, 0},  // BGGR
      {1, 0, 2, 1},  // GRBG
      {1, 2, 0, 1},  // GBRG
  };
  return kTiles[static_cast<int>(pattern)][(y & 1) * 2 + (x & 1)];
}

void NoiseParams::validate() const {
  if (!(sigma_p >= 0.0) || !(sigma_g >= 0.0)) {
    throw ConfigError("noise strengths must be non-negative");
  }
}

SimulationParams sample_params(std::mt19937_64& rng) {
  using Dist = std::uniform_real_distribution<double>;
  SimulationParams p;
  p.alpha = Dist(SimulationParams::kAlphaMin, SimulationParams::kAlphaMax)(rng);
  p.beta = Dist(SimulationParams::kBetaMin, SimulationParams::kBetaMax)(rng);
  p.gamma = Dist(SimulationParams::kGammaMin, SimulationParams::kGammaMax)(rng);
  return p;
}

NoiseParams sample_noise_params(std::mt19937_64& rng, const NoiseRanges& ranges) {
  using Dist = std::uniform_real_distribution<double>;
  NoiseParams p;
  p.sigma_p = std::sqrt(Dist(0.0, ranges.sigma_p2_max)(rng));
  p.sigma_g = Dist(0.0, ranges.sigma_g_max)(rng);
  p.crf = ranges.crf;
  p.pattern = ranges.pattern;
  p.seed = rng();
  return p;
}

ImageRGB darken(const ImageRGB& image, const SimulationParams& params) {
  ImageRGB out(image.width(), image.height());
  for (int c = 0; c < 3; ++c) {
    const auto src = image.channel(c).samples();
    auto dst = out.channel(c).samples();
    for (std::size_t i = 0; i < src.size(); ++i) {
      dst[i] = params.beta * std::pow(params.alpha * src[i], params.gamma);
    }
  }
  out.clamp();
  return out;
}

Plane mosaic(const ImageRGB& image, BayerPattern pattern) {
  Plane out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.at(x, y) = image.at(bayer_channel(pattern, x, y), x, y);
    }
  }
  return out;
}

ImageRGB demosaic(const Plane& bayer, BayerPattern pattern) {
  const int w = bayer.width();
  const int h = bayer.height();
  ImageRGB out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int own = bayer_channel(pattern, x, y);
      std::array<double, 3> sum{0, 0, 0};
      std::array<int, 3> count{0, 0, 0};
      // With a 2x2 period, the same-colour samples of a 3x3 window are
      // exactly the bilinear neighbours (axial pair/quad or diagonals).
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int c = bayer_channel(pattern, x + dx, y + dy);
          if (c == own) continue;
          sum[static_cast<std::size_t>(c)] += bayer.at(mirror(x + dx, w), mirror(y + dy, h));
          ++count[static_cast<std::size_t>(c)];
        }
      }
      for (int c = 0; c < 3; ++c) {
        out.at(c, x, y) = c == own ? bayer.at(x, y)
                                   : sum[static_cast<std::size_t>(c)] /
                                         count[static_cast<std::size_t>(c)];
      }
    }
  }
  return out;
}

Plane add_sensor_noise(const Plane& linear_bayer, double sigma_p,
                       double sigma_g, std::mt19937_64& rng) {
  const double chi = sigma_p * sigma_p;
  std::poisson_distribution<long long> poisson;
  std::normal_distribution<double> normal(0.0, sigma_g > 0.0 ? sigma_g : 1.0);
  Plane out(linear_bayer.width(), linear_bayer.height());
  for (std::size_t i = 0; i < linear_bayer.size(); ++i) {
    double v = linear_bayer[i];
    if (chi > 0.0) {
      const double mean = v / chi;
      v = mean > 0.0
              ? static_cast<double>(poisson(
                    rng, std::poisson_distribution<long long>::param_type(mean))) *
                    chi
              : 0.0;
    }
    if (sigma_g > 0.0) v += normal(rng);
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

Plane noisy_bayer(const ImageRGB& image, const NoiseParams& params) {
  params.validate();
  std::mt19937_64 rng(params.seed);
  const Plane linear = mosaic(crf_invert(pad_to_even(image), params.crf),
                              params.pattern);
  return add_sensor_noise(linear, params.sigma_p, params.sigma_g, rng);
}

ImageRGB synthesize_noise(const ImageRGB& image, const NoiseParams& params) {
  const Plane bayer = noisy_bayer(image, params);
  ImageRGB out = crf_apply(demosaic(bayer, params.pattern), params.crf);
  out.clamp();
  return crop(out, image.width(), image.height());
}

SyntheticPair synthesize_pair(const ImageRGB& image,
                              const SimulationParams& params,
                              const NoiseParams& noise) {
  SyntheticPair pair;
  pair.dark = darken(image, params);
  pair.dark_noisy = synthesize_noise(pair.dark, noise);
  return pair;
}

}  // namespace lowlight
