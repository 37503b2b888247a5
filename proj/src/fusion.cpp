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

#include "lowlight/fusion.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {
namespace {

constexpr std::array<double, 5> kBinomial = {1.0 / 16, 4.0 / 16, 6.0 / 16,
                                             4.0 / 16, 1.0 / 16};

int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

// Separable binomial blur followed by 2x decimation.
Plane reduce(const Plane& in) {
  const int w = in.width(), h = in.height();
  const int cw = (w + 1) / 2, ch = (h + 1) / 2;
  Plane rows(cw, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < cw; ++x) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) {
        s += kBinomial[static_cast<std::size_t>(k + 2)] * in.at(mirror(2 * x + k, w), y);
      }
      rows.at(x, y) = s;
    }
  }
  Plane out(cw, ch);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) {
        s += kBinomial[static_cast<std::size_t>(k + 2)] * rows.at(x, mirror(2 * y + k, h));
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

// Interpolates a coarse level up to (w, h). Fine sample i gathers coarse
// samples j with |i - 2j| <= 2, weight 2*kernel, so constants are preserved.
Plane expand(const Plane& coarse, int w, int h) {
  const int cw = coarse.width(), ch = coarse.height();
  auto upsample_1d = [](auto&& get, int n_coarse, int i) {
    double s = 0.0;
    for (int j = (i - 2 + 1) / 2 - 1; j <= (i + 2) / 2 + 1; ++j) {
      const int d = i - 2 * j;
      if (d < -2 || d > 2) continue;
      s += 2.0 * kBinomial[static_cast<std::size_t>(d + 2)] * get(mirror(j, n_coarse));
    }
    return s;
  };
  Plane rows(w, ch);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < w; ++x) {
      rows.at(x, y) = upsample_1d([&](int j) { return coarse.at(j, y); }, cw, x);
    }
  }
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = upsample_1d([&](int j) { return rows.at(x, j); }, ch, y);
    }
  }
  return out;
}

Plane laplacian3(const Plane& p) {
  const int w = p.width(), h = p.height();
  Plane out(w, h);
  auto px = [&](int x, int y) {
    return p.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(x, y) = px(x - 1, y) + px(x + 1, y) + px(x, y - 1) + px(x, y + 1) -
                     4.0 * px(x, y);
    }
  }
  return out;
}

// FFTW planning and plan destruction are not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// DCT-II / DCT-III pair on a W x H buffer; diagonalises the Neumann
// Laplacian built from forward differences.
class DctSolver {
 public:
  DctSolver(int width, int height) : width_(width), height_(height) {
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    buffer_ = fftw_alloc_real(n);
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward_ = fftw_plan_r2r_2d(height, width, buffer_, buffer_, FFTW_REDFT10,
                                FFTW_REDFT10, FFTW_ESTIMATE);
    backward_ = fftw_plan_r2r_2d(height, width, buffer_, buffer_, FFTW_REDFT01,
                                 FFTW_REDFT01, FFTW_ESTIMATE);
    eig_x_.resize(static_cast<std::size_t>(width));
    eig_y_.resize(static_cast<std::size_t>(height));
    for (int k = 0; k < width; ++k) {
      eig_x_[static_cast<std::size_t>(k)] = 2.0 - 2.0 * std::cos(std::numbers::pi * k / width);
    }
    for (int k = 0; k < height; ++k) {
      eig_y_[static_cast<std::size_t>(k)] = 2.0 - 2.0 * std::cos(std::numbers::pi * k / height);
    }
  }
  ~DctSolver() {
    {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(buffer_);
  }
  DctSolver(const DctSolver&) = delete;
  DctSolver& operator=(const DctSolver&) = delete;

  // Solves (Id + beta * D^T D) s = rhs in place.
  void solve(Plane& rhs, double beta) {
    const std::size_t n = rhs.size();
    std::copy(rhs.samples().begin(), rhs.samples().end(), buffer_);
    fftw_execute(forward_);
    const double norm = 1.0 / (4.0 * width_ * height_);
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                              static_cast<std::size_t>(x);
        buffer_[i] *= norm / (1.0 + beta * (eig_x_[static_cast<std::size_t>(x)] +
                                            eig_y_[static_cast<std::size_t>(y)]));
      }
    }
    fftw_execute(backward_);
    std::copy(buffer_, buffer_ + n, rhs.samples().begin());
  }

 private:
  int width_;
  int height_;
  double* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  std::vector<double> eig_x_;
  std::vector<double> eig_y_;
};

// Forward differences; zero in the last column / row.
void gradients(const Plane& s, Plane& gx, Plane& gy) {
  const int w = s.width(), h = s.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      gx.at(x, y) = x + 1 < w ? s.at(x + 1, y) - s.at(x, y) : 0.0;
      gy.at(x, y) = y + 1 < h ? s.at(x, y + 1) - s.at(x, y) : 0.0;
    }
  }
}

// Adds D^T [hx; hy] to out.
void add_divergence_adjoint(const Plane& hx, const Plane& hy, Plane& out) {
  const int w = hx.width(), h = hx.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      if (x + 1 < w) v -= hx.at(x, y);
      if (x > 0) v += hx.at(x - 1, y);
      if (y + 1 < h) v -= hy.at(x, y);
      if (y > 0) v += hy.at(x, y - 1);
      out.at(x, y) += v;
    }
  }
}

struct Auxiliary {
  std::array<Plane, 3> hx, hy;
};

double hqs_energy(const ImageRGB& input, const ImageRGB& s, const Auxiliary& aux,
                  double lambda, double beta) {
  const int w = input.width(), h = input.height();
  Plane gx(w, h), gy(w, h);
  double fidelity = 0.0, coupling = 0.0;
  std::vector<bool> nonzero(input.pixel_count(), false);
  for (int c = 0; c < 3; ++c) {
    gradients(s.channel(c), gx, gy);
    const auto& hx = aux.hx[static_cast<std::size_t>(c)];
    const auto& hy = aux.hy[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double d = s.channel(c)[i] - input.channel(c)[i];
      fidelity += d * d;
      const double ex = gx[i] - hx[i], ey = gy[i] - hy[i];
      coupling += ex * ex + ey * ey;
      if (hx[i] != 0.0 || hy[i] != 0.0) nonzero[i] = true;
    }
  }
  const auto count = static_cast<double>(std::count(nonzero.begin(), nonzero.end(), true));
  return fidelity + lambda * count + beta * coupling;
}

}  // namespace

void FusionConfig::validate() const {
  if (stack_size < 1) throw ConfigError("stack_size must be >= 1");
  if (!(gamma_min > 0) || gamma_max < gamma_min) {
    throw ConfigError("gamma range must be positive and ordered");
  }
  if (saturation_min < 0 || saturation_max < saturation_min) {
    throw ConfigError("saturation range must be non-negative and ordered");
  }
  if (w_contrast < 0 || w_saturation < 0 || w_exposedness < 0) {
    throw ConfigError("fusion weight exponents must be non-negative");
  }
  if (!(sigma_exposedness > 0)) throw ConfigError("sigma_exposedness must be > 0");
  if (pyramid_levels < 0) throw ConfigError("pyramid_levels must be >= 0 (0 = auto)");
  if (!(detail_lambda > 0)) throw ConfigError("detail_lambda must be > 0");
  if (!(detail_boost >= 1)) throw ConfigError("detail_boost must be >= 1");
}

int FusionConfig::levels_for(int width, int height) const {
  if (pyramid_levels > 0) return pyramid_levels;
  const int side = std::max(1, std::min(width, height));
  return std::max(1, static_cast<int>(std::floor(std::log2(side))) - 2);
}

std::vector<ImageRGB> exposure_stack(const ImageRGB& image, const FusionConfig& cfg) {
  cfg.validate();
  std::vector<ImageRGB> stack;
  stack.reserve(static_cast<std::size_t>(cfg.stack_size));
  const double log_lo = std::log(cfg.gamma_min), log_hi = std::log(cfg.gamma_max);
  for (int k = 0; k < cfg.stack_size; ++k) {
    const double t = cfg.stack_size == 1 ? 0.5 : static_cast<double>(k) / (cfg.stack_size - 1);
    const double gamma = std::exp(log_lo + t * (log_hi - log_lo));
    const double sat = cfg.saturation_min + t * (cfg.saturation_max - cfg.saturation_min);
    ImageRGB frame(image.width(), image.height());
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
      std::array<double, 3> c{};
      for (int ch = 0; ch < 3; ++ch) {
        c[static_cast<std::size_t>(ch)] =
            gamma == 1.0 ? image.channel(ch)[i] : std::pow(image.channel(ch)[i], gamma);
      }
      const double y = luma(c[0], c[1], c[2]);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = c[static_cast<std::size_t>(ch)];
        frame.channel(ch)[i] = sat == 1.0 ? v : y + sat * (v - y);
      }
    }
    frame.clamp();
    stack.push_back(std::move(frame));
  }
  return stack;
}

std::vector<Plane> fusion_weights(const std::vector<ImageRGB>& stack,
                                  const FusionConfig& cfg) {
  if (stack.empty()) throw ContractError("fusion_weights: empty stack");
  for (const auto& frame : stack) require_same_shape(stack.front(), frame, "fusion_weights");
  const int w = stack.front().width(), h = stack.front().height();
  const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma_exposedness * cfg.sigma_exposedness);
  constexpr double kRegulariser = 1e-12;

  std::vector<Plane> weights;
  weights.reserve(stack.size());
  for (const auto& frame : stack) {
    const Plane contrast = laplacian3(luma_plane(frame));
    Plane wgt(w, h);
    for (std::size_t i = 0; i < wgt.size(); ++i) {
      const double r = frame.channel(0)[i], g = frame.channel(1)[i], b = frame.channel(2)[i];
      const double mean = (r + g + b) / 3.0;
      const double sat = std::sqrt(((r - mean) * (r - mean) + (g - mean) * (g - mean) +
                                    (b - mean) * (b - mean)) / 3.0);
      const double expo = std::exp(-((r - 0.5) * (r - 0.5) + (g - 0.5) * (g - 0.5) +
                                     (b - 0.5) * (b - 0.5)) * inv_two_sigma2);
      wgt[i] = std::pow(std::abs(contrast[i]), cfg.w_contrast) *
                   std::pow(sat, cfg.w_saturation) *
                   std::pow(expo, cfg.w_exposedness) +
               kRegulariser;
    }
    weights.push_back(std::move(wgt));
  }
  for (std::size_t i = 0; i < weights.front().size(); ++i) {
    double total = 0.0;
    for (const auto& wgt : weights) total += wgt[i];
    for (auto& wgt : weights) wgt[i] /= total;
  }
  return weights;
}

std::vector<Plane> gaussian_pyramid(const Plane& plane, int levels) {
  std::vector<Plane> pyr{plane};
  for (int l = 1; l < levels; ++l) {
    const Plane& top = pyr.back();
    if (top.width() == 1 && top.height() == 1) break;
    pyr.push_back(reduce(top));
  }
  return pyr;
}

std::vector<Plane> laplacian_pyramid(const Plane& plane, int levels) {
  std::vector<Plane> pyr = gaussian_pyramid(plane, levels);
  for (std::size_t l = 0; l + 1 < pyr.size(); ++l) {
    const Plane up = expand(pyr[l + 1], pyr[l].width(), pyr[l].height());
    for (std::size_t i = 0; i < up.size(); ++i) pyr[l][i] -= up[i];
  }
  return pyr;
}

Plane collapse_pyramid(const std::vector<Plane>& pyramid) {
  if (pyramid.empty()) throw ContractError("collapse_pyramid: empty pyramid");
  Plane out = pyramid.back();
  for (std::size_t l = pyramid.size() - 1; l-- > 0;) {
    Plane up = expand(out, pyramid[l].width(), pyramid[l].height());
    for (std::size_t i = 0; i < up.size(); ++i) up[i] += pyramid[l][i];
    out = std::move(up);
  }
  return out;
}

ImageRGB pyramid_fuse(const std::vector<ImageRGB>& stack,
                      const std::vector<Plane>& weights, const FusionConfig& cfg) {
  if (stack.empty() || stack.size() != weights.size()) {
    throw ContractError("pyramid_fuse: stack and weights must be non-empty and paired");
  }
  const int w = stack.front().width(), h = stack.front().height();
  const int levels = cfg.levels_for(w, h);
  std::vector<std::vector<Plane>> weight_pyr;
  weight_pyr.reserve(weights.size());
  for (const auto& wgt : weights) {
    if (wgt.width() != w || wgt.height() != h) {
      throw ContractError("pyramid_fuse: weight map size differs from frames");
    }
    weight_pyr.push_back(gaussian_pyramid(wgt, levels));
  }

  std::array<Plane, 3> channels;
  for (int c = 0; c < 3; ++c) {
    std::vector<Plane> blended;
    for (std::size_t k = 0; k < stack.size(); ++k) {
      const std::vector<Plane> lap = laplacian_pyramid(stack[k].channel(c), levels);
      if (blended.empty()) {
        for (const auto& level : lap) blended.emplace_back(level.width(), level.height());
      }
      for (std::size_t l = 0; l < lap.size(); ++l) {
        const Plane& g = weight_pyr[k][l];
        for (std::size_t i = 0; i < lap[l].size(); ++i) blended[l][i] += g[i] * lap[l][i];
      }
    }
    channels[static_cast<std::size_t>(c)] = collapse_pyramid(blended);
  }
  ImageRGB out(std::move(channels[0]), std::move(channels[1]), std::move(channels[2]));
  out.clamp();
  return out;
}

L0Result l0_smooth(const ImageRGB& image, double lambda, double kappa, double beta_max) {
  if (!(lambda > 0) || !(kappa > 1) || !(beta_max > 0)) {
    throw ContractError("l0_smooth: need lambda > 0, kappa > 1, beta_max > 0");
  }
  const int w = image.width(), h = image.height();
  DctSolver solver(w, h);
  L0Result result{image, {}};
  ImageRGB& s = result.smoothed;

  // h_0 = grad(I): the unsplit starting point.
  Auxiliary aux;
  for (int c = 0; c < 3; ++c) {
    aux.hx[static_cast<std::size_t>(c)] = Plane(w, h);
    aux.hy[static_cast<std::size_t>(c)] = Plane(w, h);
    gradients(image.channel(c), aux.hx[static_cast<std::size_t>(c)],
              aux.hy[static_cast<std::size_t>(c)]);
  }

  std::array<Plane, 3> gx{Plane(w, h), Plane(w, h), Plane(w, h)};
  std::array<Plane, 3> gy{Plane(w, h), Plane(w, h), Plane(w, h)};
  for (double beta = 2.0 * lambda; beta < beta_max; beta *= kappa) {
    L0Iteration it;
    it.beta = beta;
    it.energy_before = hqs_energy(image, s, aux, lambda, beta);

    // h-subproblem: hard threshold of the colour gradient magnitude.
    for (int c = 0; c < 3; ++c) {
      gradients(s.channel(c), gx[static_cast<std::size_t>(c)], gy[static_cast<std::size_t>(c)]);
    }
    const double threshold = lambda / beta;
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
      double mag = 0.0;
      for (std::size_t c = 0; c < 3; ++c) mag += gx[c][i] * gx[c][i] + gy[c][i] * gy[c][i];
      const bool keep = mag > threshold;
      for (std::size_t c = 0; c < 3; ++c) {
        aux.hx[c][i] = keep ? gx[c][i] : 0.0;
        aux.hy[c][i] = keep ? gy[c][i] : 0.0;
      }
    }

    // S-subproblem: (Id + beta D^T D) S = I + beta D^T h.
    for (int c = 0; c < 3; ++c) {
      Plane rhs(w, h);
      Plane adj(w, h);
      add_divergence_adjoint(aux.hx[static_cast<std::size_t>(c)],
                             aux.hy[static_cast<std::size_t>(c)], adj);
      for (std::size_t i = 0; i < rhs.size(); ++i) {
        rhs[i] = image.channel(c)[i] + beta * adj[i];
      }
      solver.solve(rhs, beta);
      s.channel(c) = std::move(rhs);
    }
    it.energy_after = hqs_energy(image, s, aux, lambda, beta);
    result.trace.push_back(it);
  }
  return result;
}

ImageRGB detail_enhance(const ImageRGB& image, const FusionConfig& cfg) {
  cfg.validate();
  const L0Result l0 = l0_smooth(image, cfg.detail_lambda);
  ImageRGB out(image.width(), image.height());
  const double extra = cfg.detail_boost - 1.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
      const double v = image.channel(c)[i];
      // base + boost*(v - base), written so boost = 1 returns v untouched.
      out.channel(c)[i] = v + extra * (v - l0.smoothed.channel(c)[i]);
    }
  }
  out.clamp();
  return out;
}

ImageRGB amplify_contrast(const ImageRGB& image, const FusionConfig& cfg) {
  const std::vector<ImageRGB> stack = exposure_stack(image, cfg);
  const std::vector<Plane> weights = fusion_weights(stack, cfg);
  return detail_enhance(pyramid_fuse(stack, weights, cfg), cfg);
}

}  // namespace lowlight
