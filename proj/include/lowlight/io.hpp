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

#include <filesystem>

#include "lowlight/image.hpp"

namespace lowlight {

// Loads an 8/16-bit PNG or a baseline 8-bit JPEG and scales to [0,1].
// Grayscale sources are replicated to three channels; alpha is dropped.
// Throws IoError / FormatError.
ImageRGB load_image(const std::filesystem::path& path);

// Writes an RGB PNG rounding each sample to the nearest code value.
// depth must be 8 or 16.
void save_image(const ImageRGB& image, const std::filesystem::path& path,
                int depth = 8);

// Single-channel PNG helpers. load_gray accepts 8/16-bit gray PNGs.
void save_gray(const Plane& plane, const std::filesystem::path& path,
               int depth = 16);
Plane load_gray(const std::filesystem::path& path);

// Rounds to the code grid of the given depth, as a save/load round trip would.
ImageRGB quantize(const ImageRGB& image, int depth);
Plane quantize(const Plane& plane, int depth);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace lowlight
