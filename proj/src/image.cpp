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

#include "lowlight/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lowlight/errors.hpp"

namespace lowlight {

Plane::Plane(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw ContractError("Plane: negative dimensions");
  }
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
               fill);
}

ImageRGB::ImageRGB(int width, int height, double fill)
    : ImageRGB(width, height, fill, fill, fill) {}

ImageRGB::ImageRGB(int width, int height, double r, double g, double b)
    : width_(width),
      height_(height),
      planes_{Plane(width, height, r), Plane(width, height, g),
              Plane(width, height, b)} {}

ImageRGB::ImageRGB(Plane r, Plane g, Plane b)
    : width_(r.width()), height_(r.height()) {
  if (!r.same_shape(g) || !r.same_shape(b)) {
    throw ContractError("ImageRGB: channel planes differ in size");
  }
  planes_ = {std::move(r), std::move(g), std::move(b)};
}

void ImageRGB::clamp() {
  for (auto& plane : planes_) {
    for (double& v : plane.samples()) {
      v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    }
  }
}

Plane value_plane(const ImageRGB& image) {
  Plane out(image.width(), image.height());
  const auto r = image.channel(0).samples();
  const auto g = image.channel(1).samples();
  const auto b = image.channel(2).samples();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max({r[i], g[i], b[i]});
  }
  return out;
}

Plane luma_plane(const ImageRGB& image) {
  Plane out(image.width(), image.height());
  const auto r = image.channel(0).samples();
  const auto g = image.channel(1).samples();
  const auto b = image.channel(2).samples();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = luma(r[i], g[i], b[i]);
  }
  return out;
}

std::vector<std::uint64_t> histogram(const Plane& plane, int bins) {
  if (bins < 2) {
    throw ContractError("histogram: need at least 2 bins");
  }
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : plane.samples()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("histogram: sample outside [0,1]: " + std::to_string(v));
    }
    const int k = std::min(static_cast<int>(v * bins), bins - 1);
    ++counts[static_cast<std::size_t>(k)];
  }
  return counts;
}

void require_same_shape(const ImageRGB& a, const ImageRGB& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ContractError(std::string(op) + ": image dimensions differ (" +
                        std::to_string(a.width()) + "x" +
                        std::to_string(a.height()) + " vs " +
                        std::to_string(b.width()) + "x" +
                        std::to_string(b.height()) + ")");
  }
}

void require_same_shape(const Plane& a, const Plane& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ContractError(std::string(op) + ": plane dimensions differ");
  }
}

}  // namespace lowlight
