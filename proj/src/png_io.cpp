#include "octplaque/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace octplaque {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path, const char* what) {
  throw std::runtime_error(std::string(what) + ": " + path.string());
}

std::uint16_t quantize16(float v) {
  if (!(v >= 0.0f)) v = 0.0f;
  if (v > 1.0f) v = 1.0f;
  return static_cast<std::uint16_t>(std::lround(v * 65535.0));
}

std::uint8_t quantize8(float v) {
  if (!(v >= 0.0f)) v = 0.0f;
  if (v > 1.0f) v = 1.0f;
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

}  // namespace

void save_png16(const std::filesystem::path& path,
                const ImageMatrix<float>& img) {
  if (img.rows() <= 0 || img.cols() <= 0)
    throw std::invalid_argument("save_png16: empty image");

  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) fail(path, "cannot open for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png write error");
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols()),
               static_cast<png_uint_32>(img.rows()), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.cols()) * 2);
  for (Eigen::Index i = 0; i < img.rows(); ++i) {
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      const std::uint16_t q = quantize16(img(i, j));
      row[static_cast<std::size_t>(j) * 2] = static_cast<std::uint8_t>(q >> 8);
      row[static_cast<std::size_t>(j) * 2 + 1] =
          static_cast<std::uint8_t>(q & 0xFF);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageMatrix<float> load_png16(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) fail(path, "cannot open for reading");

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(path, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "png read error");
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  png_byte depth = png_get_bit_depth(png, info);

  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "expected grayscale PNG");
  }
  if (depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
    depth = 8;
  }
  png_read_update_info(png, info);

  const std::size_t bytes_per_px = depth == 16 ? 2 : 1;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * bytes_per_px);
  ImageMatrix<float> img(static_cast<Eigen::Index>(height),
                         static_cast<Eigen::Index>(width));
  const float scale = depth == 16 ? 1.0f / 65535.0f : 1.0f / 255.0f;
  for (png_uint_32 i = 0; i < height; ++i) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 j = 0; j < width; ++j) {
      std::uint32_t q;
      if (depth == 16)
        q = (static_cast<std::uint32_t>(row[j * 2]) << 8) | row[j * 2 + 1];
      else
        q = row[j];
      img(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<float>(q) * scale;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png_rgb8(const std::filesystem::path& path,
                   const ImageMatrix<float>& r, const ImageMatrix<float>& g,
                   const ImageMatrix<float>& b) {
  if (r.rows() != g.rows() || r.rows() != b.rows() || r.cols() != g.cols() ||
      r.cols() != b.cols())
    throw std::invalid_argument("save_png_rgb8: channel shapes differ");

  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) fail(path, "cannot open for writing");

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "png write error");
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(r.cols()),
               static_cast<png_uint_32>(r.rows()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<std::uint8_t> row(static_cast<std::size_t>(r.cols()) * 3);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      row[static_cast<std::size_t>(j) * 3] = quantize8(r(i, j));
      row[static_cast<std::size_t>(j) * 3 + 1] = quantize8(g(i, j));
      row[static_cast<std::size_t>(j) * 3 + 2] = quantize8(b(i, j));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace octplaque
