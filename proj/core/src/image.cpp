#include "cdae/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include <png.h>

#include "binary_io.hpp"
#include "cdae/error.hpp"

namespace cdae {

namespace {

bool has_suffix(const std::filesystem::path& p, std::string_view ext) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e == ext;
}

struct PngState {
  GrayImage img;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;
  int depth = 8;
  bool unsupported = false;
};

GrayImage decode_png(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.string().c_str(), "rb"), &std::fclose);
  if (!file) throw_error(ErrorCode::MissingFile, path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw_error(ErrorCode::Io, "libpng initialisation failed");
  }
  // libpng reports errors by longjmp. Everything written after setjmp
  // lives behind `st`, which itself is never reassigned.
  const auto st = std::make_unique<PngState>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw_error(ErrorCode::Truncated, "corrupt or truncated PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  st->depth = png_get_bit_depth(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
    st->unsupported = true;
  } else {
    if (st->depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);
    st->img.h = png_get_image_height(png, info);
    st->img.w = png_get_image_width(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    st->raw.resize(stride * st->img.h);
    st->rows.resize(st->img.h);
    for (std::size_t y = 0; y < st->img.h; ++y) st->rows[y] = st->raw.data() + y * stride;
    png_read_image(png, st->rows.data());
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (st->unsupported)
    throw_error(ErrorCode::UnsupportedFormat, path.string() + " is not a single-channel grayscale PNG");

  GrayImage img = std::move(st->img);
  img.values.resize(img.h * img.w);
  const std::size_t stride = img.h ? st->raw.size() / img.h : 0;
  for (std::size_t y = 0; y < img.h; ++y) {
    const std::uint8_t* row = st->raw.data() + y * stride;
    for (std::size_t x = 0; x < img.w; ++x)
      img.at(y, x) = st->depth == 16 ? ((row[2 * x] << 8) | row[2 * x + 1]) / 65535.0 : row[x] / 255.0;
  }
  return img;
}

// Skips whitespace and '#' comments in a PNM header.
std::size_t pgm_skip(std::span<const std::uint8_t> b, std::size_t pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  return pos;
}

std::size_t pgm_number(std::span<const std::uint8_t> b, std::size_t& pos) {
  pos = pgm_skip(b, pos);
  if (pos >= b.size()) throw_error(ErrorCode::Truncated, "PGM header ends early");
  if (!std::isdigit(b[pos])) throw_error(ErrorCode::UnsupportedFormat, "malformed PGM header");
  std::size_t v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    if (v > (std::size_t{1} << 32)) throw_error(ErrorCode::UnsupportedFormat, "PGM header value too large");
    ++pos;
  }
  return v;
}

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> b) {
  if (b.size() < 2) throw_error(ErrorCode::Truncated, "PGM shorter than its magic");
  if (b[0] != 'P' || b[1] != '5') throw_error(ErrorCode::UnsupportedFormat, "not a binary (P5) PGM");
  std::size_t pos = 2;
  GrayImage img;
  img.w = pgm_number(b, pos);
  img.h = pgm_number(b, pos);
  const std::size_t maxval = pgm_number(b, pos);
  if (img.w == 0 || img.h == 0) throw_error(ErrorCode::UnsupportedFormat, "PGM with zero size");
  if (maxval == 0 || maxval > 65535) throw_error(ErrorCode::UnsupportedFormat, "PGM maxval out of range");
  if (pos >= b.size()) throw_error(ErrorCode::Truncated, "PGM has no pixel data");
  ++pos;  // single whitespace byte before the raster
  const std::size_t bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t need = img.w * img.h * bytes_per;
  if (b.size() - pos < need)
    throw_error(ErrorCode::Truncated, "PGM raster has " + std::to_string(b.size() - pos) +
                                          " bytes, expected " + std::to_string(need));
  img.values.resize(img.w * img.h);
  const double scale = static_cast<double>(maxval);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const std::size_t raw = bytes_per == 2 ? (std::size_t{b[pos + 2 * i]} << 8) | b[pos + 2 * i + 1]
                                           : b[pos + i];
    img.values[i] = std::min(1.0, static_cast<double>(raw) / scale);
  }
  return img;
}

GrayImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw_error(ErrorCode::MissingFile, path.string());
  if (has_suffix(path, ".png")) return decode_png(path);
  const auto bytes = detail::read_file(path);
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P' && bytes[2] == 'N' && bytes[3] == 'G')
    return decode_png(path);
  try {
    return decode_pgm(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " [" + path.string() + "]");
  }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.w) + " " + std::to_string(img.h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.values.size());
  for (double v : img.values)
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  detail::write_file(path, encode_pgm(img));
}

namespace {

struct Tap {
  std::size_t src;
  double weight;
};

// Per output index, the source indices and fractional coverages of the
// interval [i * n / m, (i + 1) * n / m), normalised to sum to 1.
std::vector<std::vector<Tap>> area_taps(std::size_t n, std::size_t m) {
  std::vector<std::vector<Tap>> taps(m);
  for (std::size_t i = 0; i < m; ++i) {
    // Exact rational bounds: [i*n, (i+1)*n) in units of 1/m source pixels.
    const std::size_t lo = i * n, hi = (i + 1) * n;
    for (std::size_t s = lo / m; s * m < hi; ++s) {
      const std::size_t a = std::max(lo, s * m), b = std::min(hi, (s + 1) * m);
      if (b > a) taps[i].push_back({s, static_cast<double>(b - a) / static_cast<double>(n)});
    }
  }
  return taps;
}

}  // namespace

GrayImage downsample(const GrayImage& img, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw_error(ErrorCode::InvalidArgument, "empty output size");
  if (out_h > img.h || out_w > img.w)
    throw_error(ErrorCode::InvalidArgument,
                "cannot upscale " + std::to_string(img.h) + "x" + std::to_string(img.w) + " to " +
                    std::to_string(out_h) + "x" + std::to_string(out_w));
  if (out_h == img.h && out_w == img.w) return img;
  const auto rows = area_taps(img.h, out_h);
  const auto cols = area_taps(img.w, out_w);

  std::vector<double> tmp(out_h * img.w, 0.0);
  for (std::size_t i = 0; i < out_h; ++i)
    for (const Tap& t : rows[i])
      for (std::size_t x = 0; x < img.w; ++x) tmp[i * img.w + x] += t.weight * img.at(t.src, x);

  GrayImage out{out_h, out_w, std::vector<double>(out_h * out_w, 0.0)};
  for (std::size_t i = 0; i < out_h; ++i)
    for (std::size_t j = 0; j < out_w; ++j) {
      double acc = 0.0;
      for (const Tap& t : cols[j]) acc += t.weight * tmp[i * img.w + t.src];
      out.at(i, j) = std::clamp(acc, 0.0, 1.0);
    }
  return out;
}

Tensor normalize(const GrayImage& img) {
  Tensor t(Shape{1, 1, img.h, img.w});
  for (std::size_t i = 0; i < img.values.size(); ++i) t[i] = 2.0 * img.values[i] - 1.0;
  return t;
}

GrayImage denormalize(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.n != 1 || s.c != 1) throw_error(ErrorCode::ShapeMismatch, "denormalize expects (1,1,h,w), got " + to_string(s));
  GrayImage img{s.h, s.w, std::vector<double>(t.size())};
  for (std::size_t i = 0; i < t.size(); ++i) img.values[i] = (t[i] + 1.0) * 0.5;
  return img;
}

}  // namespace cdae
