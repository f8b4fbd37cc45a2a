// Copyright 2026 The brainalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "brainalign/dataio/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

namespace brainalign::dataio {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp, png_const_charp message) { throw IoError(std::string("png: ") + message); }
void png_warn(png_structp, png_const_charp) {}

}  // namespace

void write_png(const std::filesystem::path& path, const Tensor& image) {
  if (image.ndim() != 3 || (image.dim(0) != 1 && image.dim(0) != 3))
    throw DimensionError("write_png: expected [1|3, H, W], got " + to_string(image.shape()));
  const std::size_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
  const auto px = image.to_vector();
  std::vector<png_byte> rows(H * W * C);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < H * W; ++i)
      rows[i * C + c] = static_cast<png_byte>(std::lround(std::clamp(px[c * H * W + i], 0.0, 1.0) * 255.0));

  File file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  try {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, png_uint_32(W), png_uint_32(H), 8, C == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < H; ++y) png_write_row(png, &rows[y * W * C]);
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
}

Tensor read_png(const std::filesystem::path& path, DType dtype) {
  File file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  std::vector<double> values;
  Shape shape;
  try {
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) != 8 || (color != PNG_COLOR_TYPE_RGB && color != PNG_COLOR_TYPE_GRAY))
      throw FormatError("read_png: only 8-bit gray or RGB images are supported", 0);
    const std::size_t C = color == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const std::size_t H = png_get_image_height(png, info), W = png_get_image_width(png, info);
    std::vector<png_byte> row(W * C);
    values.resize(C * H * W);
    for (std::size_t y = 0; y < H; ++y) {
      png_read_row(png, row.data(), nullptr);
      for (std::size_t x = 0; x < W; ++x)
        for (std::size_t c = 0; c < C; ++c) values[(c * H + y) * W + x] = row[x * C + c] / 255.0;
    }
    shape = {C, H, W};
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return Tensor::from_values(values, shape, dtype);
}

}  // namespace brainalign::dataio
