#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "cdae/tensor.hpp"

namespace cdae {

/// Single-channel image with intensities in [0, 1], row-major.
struct GrayImage {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> values;

  double at(std::size_t y, std::size_t x) const { return values[y * w + x]; }
  double& at(std::size_t y, std::size_t x) { return values[y * w + x]; }
};

/// Binary PGM (P5, maxval up to 65535) or grayscale PNG (1-16 bit);
/// intensities are divided by the format's maximum value. Colour or alpha
/// PNGs raise UnsupportedFormat; short files raise Truncated.
GrayImage load_image(const std::filesystem::path& path);

GrayImage decode_pgm(std::span<const std::uint8_t> bytes);

/// 8-bit P5 with values rounded from [0, 1].
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

/// Area-average resampling. Each output pixel is the coverage-weighted mean
/// of the source pixels its footprint overlaps, so non-integer factors
/// are exact box filters as well. Upscaling raises InvalidArgument.
GrayImage downsample(const GrayImage& img, std::size_t out_h, std::size_t out_w);

/// (1, 1, h, w) tensor holding 2v - 1.
Tensor normalize(const GrayImage& img);
/// Inverse of normalize for a batch-1 single-channel tensor.
GrayImage denormalize(const Tensor& t);

}  // namespace cdae
