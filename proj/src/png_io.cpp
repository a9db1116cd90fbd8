#include "gecm/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>
#include <iterator>

namespace gecm {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string(), path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string(), path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string(), path.string());
}

namespace {

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;  // after transforms: 1 or 3
  int bit_depth = 8;
  std::vector<std::uint8_t> pixels;
  char message[256] = {};
};

struct Source {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<Source*>(png_get_io_ptr(png));
  if (src->offset + n > src->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->bytes->data() + src->offset, n);
  src->offset += n;
}

void error_fn(png_structp png, png_const_charp msg) {
  auto* d = static_cast<Decoded*>(png_get_error_ptr(png));
  std::snprintf(d->message, sizeof d->message, "%s", msg);
  png_longjmp(png, 1);
}

void warning_fn(png_structp, png_const_charp) {}

// Returns false on a libpng error; the message is left in out->message.
bool decode(const std::vector<std::uint8_t>& bytes, Decoded* out) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    std::snprintf(out->message, sizeof out->message, "not a PNG file");
    return false;
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, out, error_fn, warning_fn);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  Source src{&bytes, 0};
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return false;
  }
  png_set_read_fn(png, &src, read_fn);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out->width = static_cast<int>(png_get_image_width(png, info));
  out->height = static_cast<int>(png_get_image_height(png, info));
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out->pixels.resize(stride * static_cast<std::size_t>(out->height));
  rows->resize(static_cast<std::size_t>(out->height));
  for (int y = 0; y < out->height; ++y) (*rows)[y] = out->pixels.data() + stride * y;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete rows;
  return true;
}

Decoded decode_file(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  Decoded d;
  if (!decode(bytes, &d)) throw Error(ErrorCode::IoError, path.string() + ": " + d.message, path.string());
  return d;
}

double sample(const Decoded& d, int x, int y, int channel) {
  const std::size_t i = (static_cast<std::size_t>(y) * d.width + x) * d.channels + channel;
  if (d.bit_depth == 16) return static_cast<double>((d.pixels[2 * i] << 8) | d.pixels[2 * i + 1]);
  return static_cast<double>(d.pixels[i]);
}

struct Sink {
  std::vector<std::uint8_t>* bytes;
};

void write_fn(png_structp png, png_bytep data, png_size_t n) {
  auto* sink = static_cast<Sink*>(png_get_io_ptr(png));
  sink->bytes->insert(sink->bytes->end(), data, data + n);
}

void flush_fn(png_structp) {}

std::vector<std::uint8_t> encode(const std::uint8_t* pixels, int width, int height, int channels) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::IoError, "cannot encode an empty raster");
  auto* bytes = new std::vector<std::uint8_t>();
  Decoded err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, error_fn, warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    delete bytes;
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  Sink sink{bytes};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    delete bytes;
    throw Error(ErrorCode::IoError, std::string("PNG encoding failed: ") + err.message);
  }
  png_set_write_fn(png, &sink, write_fn, flush_fn);
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) png_write_row(png, pixels + stride * y);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::vector<std::uint8_t> result = std::move(*bytes);
  delete bytes;
  return result;
}

}  // namespace

GrayImage read_png_gray(const std::filesystem::path& path) {
  const Decoded d = decode_file(path);
  GrayImage img(d.height, d.width);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      if (d.channels >= 3) {
        img(y, x) = 0.299 * sample(d, x, y, 0) + 0.587 * sample(d, x, y, 1) + 0.114 * sample(d, x, y, 2);
      } else {
        img(y, x) = sample(d, x, y, 0);
      }
    }
  return img;
}

RgbImage read_png_rgb(const std::filesystem::path& path) {
  const Decoded d = decode_file(path);
  if (d.bit_depth != 8) throw Error(ErrorCode::IoError, "expected an 8-bit PNG", path.string());
  RgbImage img(d.width, d.height);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      if (d.channels >= 3) {
        img.set(x, y, {static_cast<std::uint8_t>(sample(d, x, y, 0)), static_cast<std::uint8_t>(sample(d, x, y, 1)),
                       static_cast<std::uint8_t>(sample(d, x, y, 2))});
      } else {
        const auto g = static_cast<std::uint8_t>(sample(d, x, y, 0));
        img.set(x, y, {g, g, g});
      }
    }
  return img;
}

std::vector<std::uint8_t> encode_png(const RgbImage& img) { return encode(img.data.data(), img.width, img.height, 3); }

std::vector<std::uint8_t> encode_png(const ByteImage& gray) {
  return encode(gray.data(), static_cast<int>(gray.cols()), static_cast<int>(gray.rows()), 1);
}

void write_png(const std::filesystem::path& path, const RgbImage& img) { write_bytes(path, encode_png(img)); }
void write_png(const std::filesystem::path& path, const ByteImage& gray) { write_bytes(path, encode_png(gray)); }

}  // namespace gecm
