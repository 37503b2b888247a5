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

#include "lowlight/io.hpp"

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "lowlight/errors.hpp"

namespace lowlight {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' (" + mode + ")");
  }
  return f;
}

// Decoded raster prior to scaling: interleaved, 1 or 3 channels.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int depth = 0;
  std::vector<std::uint16_t> samples;
};

void png_error_handler(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer != nullptr) *buffer = message;
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

// All non-trivial state lives in |out| and |error| so that a longjmp out of
// libpng never skips a destructor in this frame.
bool decode_png(std::FILE* file, RawImage& out, std::string& error,
                bool& format_error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           png_error_handler,
                                           png_warning_handler);
  if (png == nullptr) {
    error = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    error = "png_create_info_struct failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type != PNG_COLOR_TYPE_PALETTE && bit_depth != 8 &&
      bit_depth != 16) {
    error = "unsupported PNG bit depth " + std::to_string(bit_depth);
    format_error = true;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.depth = png_get_bit_depth(png, info);
  out.channels = png_get_channels(png, info);
  if (out.channels != 1 && out.channels != 3) {
    error = "unsupported PNG channel count " + std::to_string(out.channels);
    format_error = true;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<png_byte>* volatile bytes = new std::vector<png_byte>(
      row_bytes * static_cast<std::size_t>(out.height));
  std::vector<png_bytep>* volatile rows =
      new std::vector<png_bytep>(static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) {
    (*rows)[static_cast<std::size_t>(y)] =
        bytes->data() + row_bytes * static_cast<std::size_t>(y);
  }
  // Re-arm so the heap buffers are released on a mid-image error.
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    delete bytes;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t count = static_cast<std::size_t>(out.width) *
                            static_cast<std::size_t>(out.height) *
                            static_cast<std::size_t>(out.channels);
  out.samples.resize(count);
  if (out.depth == 16) {
    for (std::size_t i = 0; i < count; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(((*bytes)[2 * i] << 8) |
                                                  (*bytes)[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) out.samples[i] = (*bytes)[i];
  }
  delete rows;
  delete bytes;
  return true;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

bool decode_jpeg(std::FILE* file, RawImage& out, std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager mgr;
  cinfo.err = jpeg_std_error(&mgr.base);
  mgr.base.error_exit = jpeg_error_exit;
  mgr.message[0] = '\0';
  if (setjmp(mgr.jump)) {
    error = mgr.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space =
      cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = cinfo.output_components;
  out.depth = 8;
  const std::size_t stride = static_cast<std::size_t>(out.width) *
                             static_cast<std::size_t>(out.channels);
  out.samples.resize(stride * static_cast<std::size_t>(out.height));
  std::vector<JSAMPLE>* line = new std::vector<JSAMPLE>(stride);
  if (setjmp(mgr.jump)) {
    error = mgr.message;
    delete line;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    const std::size_t y = cinfo.output_scanline;
    JSAMPROW ptr = line->data();
    jpeg_read_scanlines(&cinfo, &ptr, 1);
    std::copy(line->begin(), line->end(),
              out.samples.begin() + static_cast<std::ptrdiff_t>(y * stride));
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  delete line;
  return true;
}

ImageRGB to_image(const RawImage& raw) {
  // Division, not a reciprocal product, so decoded samples equal quantize().
  const double max_code = (1 << raw.depth) - 1;
  ImageRGB image(raw.width, raw.height);
  const std::size_t n = image.pixel_count();
  for (int c = 0; c < 3; ++c) {
    auto dst = image.channel(c).samples();
    const std::size_t src_c = raw.channels == 1 ? 0 : static_cast<std::size_t>(c);
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] = raw.samples[i * static_cast<std::size_t>(raw.channels) + src_c] /
               max_code;
    }
  }
  return image;
}

std::uint16_t to_code(double v, int max_code) {
  if (!std::isfinite(v)) v = 0.0;
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(clamped * max_code));
}

void write_png(const std::filesystem::path& path, int width, int height,
               int channels, int depth,
               const std::vector<std::uint16_t>& samples) {
  if (depth != 8 && depth != 16) {
    throw ContractError("PNG depth must be 8 or 16, got " +
                        std::to_string(depth));
  }
  const std::size_t bytes_per_sample = depth == 16 ? 2 : 1;
  const std::size_t row_bytes = static_cast<std::size_t>(width) *
                                static_cast<std::size_t>(channels) *
                                bytes_per_sample;
  std::vector<png_byte> bytes(row_bytes * static_cast<std::size_t>(height));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (depth == 16) {
      bytes[2 * i] = static_cast<png_byte>(samples[i] >> 8);
      bytes[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xff);
    } else {
      bytes[i] = static_cast<png_byte>(samples[i]);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        bytes.data() + row_bytes * static_cast<std::size_t>(y);
  }

  FilePtr file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            png_error_handler,
                                            png_warning_handler);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed for '" + path.string() + "'");
  }
  volatile bool ok = false;
  if (!setjmp(png_jmpbuf(png))) {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    ok = true;
  }
  png_destroy_write_struct(&png, &info);
  if (!ok) {
    throw IoError("failed writing '" + path.string() + "': " + error);
  }
  if (std::fflush(file.get()) != 0) {
    throw IoError("failed flushing '" + path.string() + "'");
  }
}

RawImage decode_file(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  std::array<unsigned char, 8> magic{};
  const std::size_t got = std::fread(magic.data(), 1, magic.size(), file.get());
  std::rewind(file.get());
  RawImage raw;
  std::string error;
  if (got == 8 && png_sig_cmp(magic.data(), 0, 8) == 0) {
    bool format_error = false;
    if (!decode_png(file.get(), raw, error, format_error)) {
      if (format_error) throw FormatError("'" + path.string() + "': " + error);
      throw IoError("cannot decode PNG '" + path.string() + "': " + error);
    }
    return raw;
  }
  if (got >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) {
    if (!decode_jpeg(file.get(), raw, error)) {
      throw IoError("cannot decode JPEG '" + path.string() + "': " + error);
    }
    return raw;
  }
  throw IoError("'" + path.string() + "' is neither PNG nor JPEG");
}

}  // namespace

ImageRGB load_image(const std::filesystem::path& path) {
  const RawImage raw = decode_file(path);
  if (raw.width < 1 || raw.height < 1) {
    throw FormatError("'" + path.string() + "' has no pixels");
  }
  return to_image(raw);
}

void save_image(const ImageRGB& image, const std::filesystem::path& path,
                int depth) {
  if (depth != 8 && depth != 16) {
    throw ContractError("save_image: depth must be 8 or 16");
  }
  const int max_code = (1 << depth) - 1;
  const std::size_t n = image.pixel_count();
  std::vector<std::uint16_t> samples(n * 3);
  for (int c = 0; c < 3; ++c) {
    const auto src = image.channel(c).samples();
    for (std::size_t i = 0; i < n; ++i) {
      samples[i * 3 + static_cast<std::size_t>(c)] = to_code(src[i], max_code);
    }
  }
  write_png(path, image.width(), image.height(), 3, depth, samples);
}

void save_gray(const Plane& plane, const std::filesystem::path& path,
               int depth) {
  if (depth != 8 && depth != 16) {
    throw ContractError("save_gray: depth must be 8 or 16");
  }
  const int max_code = (1 << depth) - 1;
  std::vector<std::uint16_t> samples(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i) {
    samples[i] = to_code(plane[i], max_code);
  }
  write_png(path, plane.width(), plane.height(), 1, depth, samples);
}

Plane load_gray(const std::filesystem::path& path) {
  const RawImage raw = decode_file(path);
  if (raw.channels != 1) {
    throw FormatError("'" + path.string() + "' is not single-channel");
  }
  const double max_code = (1 << raw.depth) - 1;
  Plane plane(raw.width, raw.height);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    plane[i] = raw.samples[i] / max_code;
  }
  return plane;
}

Plane quantize(const Plane& plane, int depth) {
  const int max_code = (1 << depth) - 1;
  Plane out(plane.width(), plane.height());
  for (std::size_t i = 0; i < plane.size(); ++i) {
    out[i] = to_code(plane[i], max_code) / static_cast<double>(max_code);
  }
  return out;
}

ImageRGB quantize(const ImageRGB& image, int depth) {
  return ImageRGB(quantize(image.channel(0), depth),
                  quantize(image.channel(1), depth),
                  quantize(image.channel(2), depth));
}

bool has_image_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace lowlight
