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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lowlight {

// Single-channel raster of doubles, row-major.
class Plane {
 public:
  Plane() = default;
  Plane(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  double& at(int x, int y) { return data_[index(x, y)]; }
  double at(int x, int y) const { return data_[index(x, y)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> samples() { return data_; }
  std::span<const double> samples() const { return data_; }

  bool same_shape(const Plane& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Planar three-channel image. Channel 0 = R, 1 = G, 2 = B. Samples are
// nominally in [0,1]; operations that declare clamping enforce it.
class ImageRGB {
 public:
  ImageRGB() = default;
  ImageRGB(int width, int height, double fill = 0.0);
  ImageRGB(int width, int height, double r, double g, double b);
  ImageRGB(Plane r, Plane g, Plane b);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return width_ == 0 || height_ == 0; }

  Plane& channel(int c) { return planes_[static_cast<std::size_t>(c)]; }
  const Plane& channel(int c) const {
    return planes_[static_cast<std::size_t>(c)];
  }

  double& at(int c, int x, int y) { return channel(c).at(x, y); }
  double at(int c, int x, int y) const { return channel(c).at(x, y); }

  bool same_shape(const ImageRGB& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  // Clamps every sample into [0,1] in place; non-finite samples become 0.
  void clamp();

 private:
  int width_ = 0;
  int height_ = 0;
  std::array<Plane, 3> planes_;
};

// Per-pixel max over channels (HSV value, also max_c).
Plane value_plane(const ImageRGB& image);

// Full-range BT.601 luma.
Plane luma_plane(const ImageRGB& image);

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luma(double r, double g, double b) {
  return kLumaR * r + kLumaG * g + kLumaB * b;
}

// Bin k counts samples in [k/bins, (k+1)/bins); the last bin is closed.
// Throws DomainError for samples outside [0,1], ContractError for bins < 2.
std::vector<std::uint64_t> histogram(const Plane& plane, int bins = 256);

// Throws ContractError when the two images differ in size.
void require_same_shape(const ImageRGB& a, const ImageRGB& b, const char* op);
void require_same_shape(const Plane& a, const Plane& b, const char* op);

}  // namespace lowlight
