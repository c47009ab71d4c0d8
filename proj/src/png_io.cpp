#include "dgo/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

namespace dgo::png {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw InputError("cannot open " + path.string());
  return f;
}

// libpng reports errors through longjmp; only trivially destructible state lives
// between setjmp and the calls that may jump.
bool write_rows(std::FILE* fp, int width, int height, int color_type, int bit_depth,
                png_bytep* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // rows are host little-endian
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct Header {
  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0;
};

// Two-phase read: header first (so the caller can size buffers), then rows.
bool read_png(std::FILE* fp, Header& hdr, std::vector<unsigned char>* pixels, int want_color,
              int want_depth) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  hdr.width = png_get_image_width(png, info);
  hdr.height = png_get_image_height(png, info);
  hdr.bit_depth = png_get_bit_depth(png, info);
  hdr.color_type = png_get_color_type(png, info);
  if (hdr.color_type != want_color || hdr.bit_depth != want_depth || pixels == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    return pixels == nullptr;
  }
  if (want_depth == 16) png_set_swap(png);
  const std::size_t stride = png_get_rowbytes(png, info);
  if (pixels->size() != stride * hdr.height) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  for (png_uint_32 y = 0; y < hdr.height; ++y) png_read_row(png, pixels->data() + y * stride, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

template <typename Pixel>
std::vector<png_bytep> row_pointers(std::vector<Pixel>& buf, int height, std::size_t row_elems) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(buf.data() + static_cast<std::size_t>(y) * row_elems);
  }
  return rows;
}

}  // namespace

void write_rgb(const std::filesystem::path& path, const Tensor<float>& rgb) {
  require(rgb.rank() == 3 && rgb.channels() == 3, "write_rgb expects a 3 x H x W image");
  const int h = rgb.height(), w = rgb.width();
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(rgb(c, y, x), 0.0f, 1.0f);
        buf[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
            static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
    }
  }
  auto rows = row_pointers(buf, h, static_cast<std::size_t>(w) * 3);
  auto fp = open(path, "wb");
  if (!write_rows(fp.get(), w, h, PNG_COLOR_TYPE_RGB, 8, rows.data())) {
    throw InputError("failed to write " + path.string());
  }
}

Tensor<float> read_rgb(const std::filesystem::path& path) {
  Header hdr;
  {
    auto fp = open(path, "rb");
    if (!read_png(fp.get(), hdr, nullptr, PNG_COLOR_TYPE_RGB, 8)) {
      throw InputError("corrupt PNG header in " + path.string());
    }
  }
  if (hdr.color_type != PNG_COLOR_TYPE_RGB || hdr.bit_depth != 8) {
    throw InputError(path.string() + " is not an 8-bit RGB PNG");
  }
  std::vector<unsigned char> pixels(static_cast<std::size_t>(hdr.width) * hdr.height * 3);
  auto fp = open(path, "rb");
  if (!read_png(fp.get(), hdr, &pixels, PNG_COLOR_TYPE_RGB, 8)) {
    throw InputError("corrupt PNG data in " + path.string());
  }
  const int h = static_cast<int>(hdr.height), w = static_cast<int>(hdr.width);
  Tensor<float> out(3, h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        out(c, y, x) = static_cast<float>(pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c]) / 255.0f;
      }
    }
  }
  return out;
}

void write_gray16(const std::filesystem::path& path, const Gray16& img) {
  require(img.values.size() == static_cast<std::size_t>(img.height) * img.width, "gray16 size");
  std::vector<std::uint16_t> buf = img.values;
  auto rows = row_pointers(buf, img.height, static_cast<std::size_t>(img.width));
  auto fp = open(path, "wb");
  if (!write_rows(fp.get(), img.width, img.height, PNG_COLOR_TYPE_GRAY, 16, rows.data())) {
    throw InputError("failed to write " + path.string());
  }
}

Gray16 read_gray16(const std::filesystem::path& path) {
  Header hdr;
  {
    auto fp = open(path, "rb");
    if (!read_png(fp.get(), hdr, nullptr, PNG_COLOR_TYPE_GRAY, 16)) {
      throw InputError("corrupt PNG header in " + path.string());
    }
  }
  if (hdr.color_type != PNG_COLOR_TYPE_GRAY || hdr.bit_depth != 16) {
    throw InputError(path.string() + " is not a 16-bit grayscale PNG");
  }
  std::vector<unsigned char> pixels(static_cast<std::size_t>(hdr.width) * hdr.height * 2);
  auto fp = open(path, "rb");
  if (!read_png(fp.get(), hdr, &pixels, PNG_COLOR_TYPE_GRAY, 16)) {
    throw InputError("corrupt PNG data in " + path.string());
  }
  Gray16 out{static_cast<int>(hdr.height), static_cast<int>(hdr.width), {}};
  out.values.resize(static_cast<std::size_t>(out.height) * out.width);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = static_cast<std::uint16_t>(pixels[2 * i] | (pixels[2 * i + 1] << 8));
  }
  return out;
}

}  // namespace dgo::png
