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

#include "lowlight/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lowlight/errors.hpp"

namespace lowlight {
namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double center = (size - 1) / 2.0;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= total;
  return k;
}

// Separable "valid" correlation: output is (w - n + 1) x (h - n + 1).
Plane filter_valid(const Plane& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = in.width() - n + 1, oh = in.height() - n + 1;
  Plane rows(ow, in.height());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * in.at(x + i, y);
      rows.at(x, y) = s;
    }
  }
  Plane out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * rows.at(x, y + i);
      out.at(x, y) = s;
    }
  }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

ImageRGB masked(const ImageRGB& image, const SupervisionMap& mask) {
  ImageRGB out(image.width(), image.height());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
      out.channel(c)[i] = image.channel(c)[i] * mask[i];
    }
  }
  return out;
}

double mean_luma(const ImageRGB& image) {
  const Plane y = luma_plane(image);
  double s = 0.0;
  for (double v : y.samples()) s += v;
  return s / static_cast<double>(y.size());
}

// Nearest-sample subsample onto an n x m grid (cell centres).
Plane subsample(const Plane& p, int gw, int gh) {
  Plane out(gw, gh);
  for (int j = 0; j < gh; ++j) {
    const int y = std::min(p.height() - 1, static_cast<int>((j + 0.5) * p.height() / gh));
    for (int i = 0; i < gw; ++i) {
      const int x = std::min(p.width() - 1, static_cast<int>((i + 0.5) * p.width() / gw));
      out.at(i, j) = p.at(x, y);
    }
  }
  return out;
}

}  // namespace

void LossWeights::validate() const {
  if (w_eb < 0 || w_es < 0 || w_ep < 0 || w_er < 0) {
    throw ConfigError("loss weights must be non-negative");
  }
  if (!(lambda > 1)) throw ConfigError("bright-loss lambda must be > 1");
}

double psnr(const ImageRGB& a, const ImageRGB& b) {
  require_same_shape(a, b, "psnr");
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      const double d = a.channel(c)[i] - b.channel(c)[i];
      sum += d * d;
    }
  }
  if (sum == 0.0) return kPsnrIdentical;
  const double mse = sum / (3.0 * static_cast<double>(a.pixel_count()));
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Plane& a, const Plane& b, const SsimParams& p) {
  require_same_shape(a, b, "ssim");
  if (a.width() < p.window || a.height() < p.window) {
    throw ContractError("ssim: image smaller than the " + std::to_string(p.window) +
                        "x" + std::to_string(p.window) + " window");
  }
  const std::vector<double> k = gaussian_kernel(p.window, p.sigma);
  const Plane mu_a = filter_valid(a, k);
  const Plane mu_b = filter_valid(b, k);
  const Plane e_aa = filter_valid(product(a, a), k);
  const Plane e_bb = filter_valid(product(b, b), k);
  const Plane e_ab = filter_valid(product(a, b), k);
  const double c1 = p.c1(), c2 = p.c2();
  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1)) *
             ((2.0 * cov + c2) / (va + vb + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

double ssim(const ImageRGB& a, const ImageRGB& b, const SsimParams& p) {
  require_same_shape(a, b, "ssim");
  return ssim(luma_plane(a), luma_plane(b), p);
}

double average_brightness_delta(const ImageRGB& a, const ImageRGB& b) {
  require_same_shape(a, b, "average_brightness_delta");
  return 255.0 * (mean_luma(a) - mean_luma(b));
}

double loe(const ImageRGB& enhanced, const ImageRGB& original, int grid) {
  require_same_shape(enhanced, original, "loe");
  if (grid < 1) throw ContractError("loe: grid must be >= 1");
  const int gw = std::min(grid, original.width());
  const int gh = std::min(grid, original.height());
  const Plane lo = subsample(value_plane(original), gw, gh);
  const Plane le = subsample(value_plane(enhanced), gw, gh);
  const std::size_t n = lo.size();
  if (n < 2) return 0.0;
  std::size_t flips = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if ((lo[i] >= lo[j]) != (le[i] >= le[j])) ++flips;
    }
  }
  return 1000.0 * static_cast<double>(flips) / static_cast<double>(n * (n - 1));
}

double mae(const ImageRGB& a, const ImageRGB& b) {
  require_same_shape(a, b, "mae");
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      sum += std::abs(a.channel(c)[i] - b.channel(c)[i]);
    }
  }
  return sum / (3.0 * static_cast<double>(a.pixel_count()));
}

double bright_loss(const ImageRGB& pred, const ImageRGB& target, double lambda) {
  require_same_shape(pred, target, "bright_loss");
  if (!(lambda > 1)) throw ContractError("bright_loss: lambda must be > 1");
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
      const double d = pred.channel(c)[i] - target.channel(c)[i];
      sum += d >= 0.0 ? d : -lambda * d;
    }
  }
  return sum / (3.0 * static_cast<double>(pred.pixel_count()));
}

double structural_loss(const ImageRGB& pred, const ImageRGB& target, const SsimParams& p) {
  return 1.0 - ssim(pred, target, p);
}

double regional_loss(const ImageRGB& pred, const ImageRGB& target,
                     const SupervisionMap& attention, const SsimParams& p) {
  require_same_shape(pred, target, "regional_loss");
  if (attention.width() != pred.width() || attention.height() != pred.height()) {
    throw ContractError("regional_loss: attention map size differs from images");
  }
  const ImageRGB mp = masked(pred, attention);
  const ImageRGB mt = masked(target, attention);
  return mae(mp, mt) + structural_loss(mp, mt, p);
}

double map_l2(const SupervisionMap& a, const SupervisionMap& b) {
  require_same_shape(a.plane(), b.plane(), "map_l2");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.plane().size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return sum / static_cast<double>(a.plane().size());
}

double map_l1(const SupervisionMap& a, const SupervisionMap& b) {
  require_same_shape(a.plane(), b.plane(), "map_l1");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.plane().size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.plane().size());
}

double composite_loss(const ImageRGB& pred, const ImageRGB& target,
                      const SupervisionMap& attention, const LossWeights& w) {
  w.validate();
  return w.w_eb * bright_loss(pred, target, w.lambda) +
         w.w_es * structural_loss(pred, target) +
         w.w_er * regional_loss(pred, target, attention);
}

QualityReport evaluate(const ImageRGB& pred, const ImageRGB& ref,
                       const SupervisionMap* attention, const LossWeights& w) {
  w.validate();
  QualityReport r;
  r.psnr = psnr(pred, ref);
  r.ssim = ssim(pred, ref);
  r.ab = average_brightness_delta(pred, ref);
  r.loe = loe(pred, ref);
  r.bright_loss = bright_loss(pred, ref, w.lambda);
  r.structural_loss = 1.0 - r.ssim;
  if (attention != nullptr) {
    r.regional_loss = regional_loss(pred, ref, *attention);
    r.composite = w.w_eb * r.bright_loss + w.w_es * r.structural_loss +
                  w.w_er * *r.regional_loss;
  }
  return r;
}

}  // namespace lowlight
