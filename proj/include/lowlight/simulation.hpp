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
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lowlight/image.hpp"

namespace lowlight {

// Darkening triple for out = beta * (alpha * in)^gamma.
struct SimulationParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  // Ranges the sampler draws from; darken itself accepts any positive triple.
  static constexpr double kAlphaMin = 0.9, kAlphaMax = 1.0;
  static constexpr double kBetaMin = 0.5, kBetaMax = 1.0;
  static constexpr double kGammaMin = 1.5, kGammaMax = 5.0;

  bool in_sampling_range() const;
};

// Camera response function. Either the sRGB transfer curve or a
// user-supplied strictly increasing table sampled at i/(n-1).
class Crf {
 public:
  static constexpr std::size_t kTableSize = 1024;

  static Crf srgb();
  // Throws ConfigError unless the table has kTableSize entries in [0,1]
  // and is strictly increasing (the inverse would not exist otherwise).
  static Crf from_table(std::vector<double> table);

  // Linear irradiance -> stored value (f).
  double apply(double linear) const;
  // Stored value -> linear irradiance (f^-1).
  double invert(double encoded) const;

  bool is_srgb() const { return table_.empty(); }
  const std::vector<double>& table() const { return table_; }
  std::string id() const { return is_srgb() ? "srgb" : "table"; }

  friend bool operator==(const Crf&, const Crf&) = default;

 private:
  std::vector<double> table_;
};

Plane crf_apply(const Plane& plane, const Crf& crf);
Plane crf_invert(const Plane& plane, const Crf& crf);
ImageRGB crf_apply(const ImageRGB& image, const Crf& crf);
ImageRGB crf_invert(const ImageRGB& image, const Crf& crf);

enum class BayerPattern { kRGGB, kBGGR, kGRBG, kGBRG };

std::string_view to_string(BayerPattern pattern);
// Throws ConfigError on an unknown name.
BayerPattern parse_bayer_pattern(std::string_view name);

// Channel (0=R, 1=G, 2=B) recorded at pixel (x, y).
int bayer_channel(BayerPattern pattern, int x, int y);

struct NoiseParams {
  double sigma_p = 0.0;  // photon scale chi = sigma_p^2; variance at x is x*chi
  double sigma_g = 0.0;  // AWGN standard deviation, linear domain
  Crf crf = Crf::srgb();
  BayerPattern pattern = BayerPattern::kRGGB;
  std::uint64_t seed = 0;

  void validate() const;
};

// Ranges for per-image noise draws: sigma_p^2 ~ U(0, sigma_p2_max),
// sigma_g ~ U(0, sigma_g_max).
struct NoiseRanges {
  double sigma_p2_max = 0.01;
  double sigma_g_max = 0.03;
  Crf crf = Crf::srgb();
  BayerPattern pattern = BayerPattern::kRGGB;
};

SimulationParams sample_params(std::mt19937_64& rng);
NoiseParams sample_noise_params(std::mt19937_64& rng, const NoiseRanges& ranges);

// Per-channel beta * (alpha * in)^gamma, clamped to [0,1].
ImageRGB darken(const ImageRGB& image, const SimulationParams& params);

// One channel per pixel according to the 2x2 pattern.
Plane mosaic(const ImageRGB& image, BayerPattern pattern);

// Bilinear interpolation of missing samples with mirrored borders.
ImageRGB demosaic(const Plane& bayer, BayerPattern pattern);

// Scaled Poisson (x -> Pois(x/chi)*chi, chi = sigma_p^2) followed by AWGN,
// then clamped to [0,1]. Sites are visited in row-major order.
Plane add_sensor_noise(const Plane& linear_bayer, double sigma_p,
                       double sigma_g, std::mt19937_64& rng);

// Linear-domain noisy Bayer raster: f^-1, mosaic, sensor noise. Odd sizes
// are mirror-padded to even, so the result may be one pixel larger.
Plane noisy_bayer(const ImageRGB& image, const NoiseParams& params);

// f(M^-1(P(M(f^-1(I))) + N_G)), clamped to [0,1]; deterministic in seed.
ImageRGB synthesize_noise(const ImageRGB& image, const NoiseParams& params);

struct SyntheticPair {
  ImageRGB dark;
  ImageRGB dark_noisy;
};

SyntheticPair synthesize_pair(const ImageRGB& image,
                              const SimulationParams& params,
                              const NoiseParams& noise);

}  // namespace lowlight
