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

#include "lowlight/selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {
namespace {

struct Lab {
  Plane l, a, b;
};

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta ? std::cbrt(t)
                                      : t / (3 * kDelta * kDelta) + 4.0 / 29.0;
}

Lab to_lab(const ImageRGB& image) {
  const int w = image.width();
  const int h = image.height();
  Lab lab{Plane(w, h), Plane(w, h), Plane(w, h)};
  // D65 white point.
  constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const double r = srgb_to_linear(image.channel(0)[i]);
    const double g = srgb_to_linear(image.channel(1)[i]);
    const double b = srgb_to_linear(image.channel(2)[i]);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / kXn), fy = lab_f(y / kYn), fz = lab_f(z / kZn);
    lab.l[i] = 116.0 * fy - 16.0;
    lab.a[i] = 500.0 * (fx - fy);
    lab.b[i] = 200.0 * (fy - fz);
  }
  return lab;
}

struct Center {
  double l, a, b, x, y;
};

// Relabels 4-connected components; components under |min_size| pixels are
// absorbed by the neighbouring component seen first in scan order.
int enforce_connectivity(std::vector<std::int32_t>& labels, int w, int h,
                         std::size_t min_size) {
  const std::size_t n = labels.size();
  std::vector<std::int32_t> out(n, -1);
  std::vector<std::size_t> stack;
  std::vector<std::size_t> component;
  std::int32_t next = 0;
  constexpr std::array<int, 4> kDx = {-1, 1, 0, 0};
  constexpr std::array<int, 4> kDy = {0, 0, -1, 1};

  for (std::size_t start = 0; start < n; ++start) {
    if (out[start] >= 0) continue;
    const int sx = static_cast<int>(start % static_cast<std::size_t>(w));
    const int sy = static_cast<int>(start / static_cast<std::size_t>(w));
    // Adjacent already-final label, used when this component is too small.
    std::int32_t adjacent = -1;
    for (int k = 0; k < 4 && adjacent < 0; ++k) {
      const int nx = sx + kDx[static_cast<std::size_t>(k)];
      const int ny = sy + kDy[static_cast<std::size_t>(k)];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const std::size_t ni = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) +
                             static_cast<std::size_t>(nx);
      if (out[ni] >= 0) adjacent = out[ni];
    }

    component.clear();
    stack.assign(1, start);
    out[start] = next;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      component.push_back(i);
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx[static_cast<std::size_t>(k)];
        const int ny = y + kDy[static_cast<std::size_t>(k)];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t ni = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) +
                               static_cast<std::size_t>(nx);
        if (out[ni] < 0 && labels[ni] == labels[start]) {
          out[ni] = next;
          stack.push_back(ni);
        }
      }
    }
    if (component.size() < min_size && adjacent >= 0) {
      for (std::size_t i : component) out[i] = adjacent;
    } else {
      ++next;
    }
  }
  labels.swap(out);
  return next;
}

}  // namespace

void SelectionConfig::validate() const {
  if (segment_size < 4) throw ConfigError("segment_size must be >= 4");
  if (compactness <= 0) throw ConfigError("compactness must be > 0");
  if (slic_iterations < 1) throw ConfigError("slic_iterations must be >= 1");
  if (block_mean_thresh < 0 || block_var_thresh < 0 || blur_thresh < 0 ||
      color_thresh < 0) {
    throw ConfigError("selection thresholds must be non-negative");
  }
  if (bright_fraction_thresh < 0 || bright_fraction_thresh > 1) {
    throw ConfigError("bright_fraction_thresh must lie in [0,1]");
  }
}

LabelMap oversegment(const ImageRGB& image, int segment_size,
                     double compactness, int iterations) {
  if (segment_size < 4) {
    throw ContractError("oversegment: segment_size must be >= 4, got " +
                        std::to_string(segment_size));
  }
  const int w = image.width();
  const int h = image.height();
  const std::size_t n = image.pixel_count();
  LabelMap result{w, h, 1, std::vector<std::int32_t>(n, 0)};
  const int nx = std::max(1, static_cast<int>(std::lround(static_cast<double>(w) / segment_size)));
  const int ny = std::max(1, static_cast<int>(std::lround(static_cast<double>(h) / segment_size)));
  if (nx == 1 && ny == 1) {
    return result;
  }

  const Lab lab = to_lab(image);
  const double step_x = static_cast<double>(w) / nx;
  const double step_y = static_cast<double>(h) / ny;
  const double step = std::sqrt(step_x * step_y);

  auto gradient = [&](int x, int y) {
    const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
    const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h - 1);
    double g = 0.0;
    for (const Plane* p : {&lab.l, &lab.a, &lab.b}) {
      const double dx = p->at(x1, y) - p->at(x0, y);
      const double dy = p->at(x, y1) - p->at(x, y0);
      g += dx * dx + dy * dy;
    }
    return g;
  };

  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int cx = std::min(static_cast<int>((i + 0.5) * step_x), w - 1);
      int cy = std::min(static_cast<int>((j + 0.5) * step_y), h - 1);
      // Move the seed off edges: lowest gradient in its 3x3 neighbourhood.
      int best_x = cx, best_y = cy;
      double best = gradient(cx, cy);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = cx + dx, y = cy + dy;
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const double g = gradient(x, y);
          if (g < best) {
            best = g;
            best_x = x;
            best_y = y;
          }
        }
      }
      cx = best_x;
      cy = best_y;
      centers.push_back({lab.l.at(cx, cy), lab.a.at(cx, cy), lab.b.at(cx, cy),
                         static_cast<double>(cx), static_cast<double>(cy)});
    }
  }

  std::vector<double> distance(n);
  std::vector<std::int32_t>& labels = result.labels;
  const double spatial_weight = (compactness / step) * (compactness / step);
  const int radius = static_cast<int>(std::ceil(step));
  for (int iter = 0; iter < iterations; ++iter) {
    std::fill(distance.begin(), distance.end(),
              std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int x0 = std::max(0, static_cast<int>(c.x) - radius);
      const int x1 = std::min(w - 1, static_cast<int>(c.x) + radius);
      const int y0 = std::max(0, static_cast<int>(c.y) - radius);
      const int y1 = std::min(h - 1, static_cast<int>(c.y) + radius);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                                static_cast<std::size_t>(x);
          const double dl = lab.l[i] - c.l, da = lab.a[i] - c.a, db = lab.b[i] - c.b;
          const double dx = x - c.x, dy = y - c.y;
          const double d = dl * dl + da * da + db * db +
                           spatial_weight * (dx * dx + dy * dy);
          if (d < distance[i]) {
            distance[i] = d;
            labels[i] = static_cast<std::int32_t>(k);
          }
        }
      }
    }
    // Pixels no search window reached fall back to the nearest centre.
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(distance[i])) continue;
      const double x = static_cast<double>(i % static_cast<std::size_t>(w));
      const double y = static_cast<double>(i / static_cast<std::size_t>(w));
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const Center& c = centers[k];
        const double dl = lab.l[i] - c.l, da = lab.a[i] - c.a, db = lab.b[i] - c.b;
        const double d = dl * dl + da * da + db * db +
                         spatial_weight * ((x - c.x) * (x - c.x) + (y - c.y) * (y - c.y));
        if (d < distance[i]) {
          distance[i] = d;
          labels[i] = static_cast<std::int32_t>(k);
        }
      }
    }
    std::vector<Center> sums(centers.size(), Center{0, 0, 0, 0, 0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                              static_cast<std::size_t>(x);
        const auto k = static_cast<std::size_t>(labels[i]);
        sums[k].l += lab.l[i];
        sums[k].a += lab.a[i];
        sums[k].b += lab.b[i];
        sums[k].x += x;
        sums[k].y += y;
        ++counts[k];
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[k]);
      centers[k] = {sums[k].l * inv, sums[k].a * inv, sums[k].b * inv,
                    sums[k].x * inv, sums[k].y * inv};
    }
  }

  const auto min_size = static_cast<std::size_t>(step_x * step_y / 4.0);
  result.region_count = enforce_connectivity(labels, w, h, std::max<std::size_t>(min_size, 1));
  return result;
}

double darkness_estimate(const ImageRGB& image, const LabelMap& labels,
                         const SelectionConfig& cfg) {
  if (labels.width != image.width() || labels.height != image.height() ||
      labels.labels.size() != image.pixel_count()) {
    throw ContractError("darkness_estimate: label map does not match image");
  }
  if (labels.region_count < 1) {
    throw ContractError("darkness_estimate: empty label map");
  }
  const Plane value = value_plane(image);
  const auto regions = static_cast<std::size_t>(labels.region_count);
  std::vector<double> sum(regions, 0.0), sum_sq(regions, 0.0);
  std::vector<std::size_t> count(regions, 0);
  for (std::size_t i = 0; i < value.size(); ++i) {
    const auto k = static_cast<std::size_t>(labels.labels[i]);
    sum[k] += value[i];
    sum_sq[k] += value[i] * value[i];
    ++count[k];
  }
  std::size_t exposed = 0;
  std::size_t populated = 0;
  for (std::size_t k = 0; k < regions; ++k) {
    if (count[k] == 0) continue;
    ++populated;
    const double mean = sum[k] / static_cast<double>(count[k]);
    const double var = std::max(0.0, sum_sq[k] / static_cast<double>(count[k]) - mean * mean);
    const bool lit = mean > cfg.block_mean_thresh;
    const bool textured = var > cfg.block_var_thresh;
    const bool ok = cfg.exposure_rule == ExposureRule::kMeanOrVariance
                        ? (lit || textured)
                        : (lit && textured);
    if (ok) ++exposed;
  }
  return static_cast<double>(exposed) / static_cast<double>(populated);
}

double blur_estimate(const ImageRGB& image) {
  const int w = image.width();
  const int h = image.height();
  Plane y = luma_plane(image);
  for (double& v : y.samples()) v *= 255.0;
  auto px = [&](int x, int yy) {
    return y.at(std::clamp(x, 0, w - 1), std::clamp(yy, 0, h - 1));
  };
  double sum = 0.0, sum_sq = 0.0;
  for (int yy = 0; yy < h; ++yy) {
    for (int x = 0; x < w; ++x) {
      const double r = px(x - 1, yy) + px(x + 1, yy) + px(x, yy - 1) +
                       px(x, yy + 1) - 4.0 * px(x, yy);
      sum += r;
      sum_sq += r * r;
    }
  }
  const double n = static_cast<double>(image.pixel_count());
  const double mean = sum / n;
  return std::max(0.0, sum_sq / n - mean * mean);
}

double colorfulness(const ImageRGB& image) {
  double s_rg = 0, s_rg2 = 0, s_yb = 0, s_yb2 = 0;
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const double r = image.channel(0)[i] * 255.0;
    const double g = image.channel(1)[i] * 255.0;
    const double b = image.channel(2)[i] * 255.0;
    const double rg = r - g;
    const double yb = 0.5 * (r + g) - b;
    s_rg += rg;
    s_rg2 += rg * rg;
    s_yb += yb;
    s_yb2 += yb * yb;
  }
  const double n = static_cast<double>(image.pixel_count());
  const double mu_rg = s_rg / n, mu_yb = s_yb / n;
  const double var_rg = std::max(0.0, s_rg2 / n - mu_rg * mu_rg);
  const double var_yb = std::max(0.0, s_yb2 / n - mu_yb * mu_yb);
  return std::sqrt(var_rg + var_yb) +
         0.3 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb);
}

SelectionReport select(const ImageRGB& image, const SelectionConfig& cfg) {
  cfg.validate();
  SelectionReport report;
  const LabelMap labels = oversegment(image, cfg.segment_size, cfg.compactness,
                                      cfg.slic_iterations);
  report.bright_fraction = darkness_estimate(image, labels, cfg);
  report.blur_variance = blur_estimate(image);
  report.colorfulness = colorfulness(image);
  report.darkness_pass = report.bright_fraction > cfg.bright_fraction_thresh;
  report.blur_pass = report.blur_variance > cfg.blur_thresh;
  report.color_pass = report.colorfulness > cfg.color_thresh;
  report.selected = report.darkness_pass && report.blur_pass && report.color_pass;
  return report;
}

}  // namespace lowlight
