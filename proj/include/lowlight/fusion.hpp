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

#include <vector>

#include "lowlight/image.hpp"

namespace lowlight {

struct FusionConfig {
  int stack_size = 10;
  // Per-frame gamma, log-spaced over [gamma_min, gamma_max].
  double gamma_min = 0.4;
  double gamma_max = 2.2;
  // Per-frame saturation multiplier, linearly spaced.
  double saturation_min = 0.8;
  double saturation_max = 1.3;
  // Exponents of the contrast / saturation / well-exposedness measures.
  double w_contrast = 1.0;
  double w_saturation = 1.0;
  double w_exposedness = 1.0;
  double sigma_exposedness = 0.2;
  // 0 selects floor(log2(min(W,H))) - 2, at least 1.
  int pyramid_levels = 0;
  double detail_lambda = 0.02;
  double detail_boost = 1.5;

  void validate() const;
  int levels_for(int width, int height) const;
};

// Frame k: gamma then saturation blend toward luma, clamped.
std::vector<ImageRGB> exposure_stack(const ImageRGB& image,
                                     const FusionConfig& cfg = {});

// Contrast^wc * saturation^ws * exposedness^we, normalised per pixel so the
// frame weights sum to one (1e-12 regulariser keeps flat pixels defined).
std::vector<Plane> fusion_weights(const std::vector<ImageRGB>& stack,
                                  const FusionConfig& cfg = {});

// Burt-Adelson pyramids with the 5-tap binomial kernel, mirrored borders.
std::vector<Plane> gaussian_pyramid(const Plane& plane, int levels);
std::vector<Plane> laplacian_pyramid(const Plane& plane, int levels);
Plane collapse_pyramid(const std::vector<Plane>& pyramid);

// Blend Laplacian pyramids of the frames with Gaussian pyramids of the
// weights, collapse, clamp to [0,1].
ImageRGB pyramid_fuse(const std::vector<ImageRGB>& stack,
                      const std::vector<Plane>& weights,
                      const FusionConfig& cfg = {});

// One outer iteration of the half-quadratic L0 solver. Both energies are
// evaluated at this iteration's beta: before uses the previous iterate.
struct L0Iteration {
  double beta = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
};

struct L0Result {
  ImageRGB smoothed;
  std::vector<L0Iteration> trace;
};

// L0 gradient minimisation by half-quadratic splitting with beta
// continuation beta0 = 2*lambda, beta *= kappa until beta_max. Gradient
// sparsity is shared across channels.
L0Result l0_smooth(const ImageRGB& image, double lambda, double kappa = 2.0,
                   double beta_max = 1e5);

// base = L0(image); out = clamp(base + boost * (image - base)).
ImageRGB detail_enhance(const ImageRGB& image, const FusionConfig& cfg = {});

// exposure_stack -> fusion_weights -> pyramid_fuse -> detail_enhance.
ImageRGB amplify_contrast(const ImageRGB& image, const FusionConfig& cfg = {});

}  // namespace lowlight
