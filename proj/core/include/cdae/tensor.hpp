#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cdae/rng.hpp"

namespace cdae {

/// Extents of a dense (batch, channel, height, width) array.
struct Shape {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t count() const noexcept { return n * c * h * w; }
  std::size_t plane() const noexcept { return h * w; }
  std::size_t sample() const noexcept { return c * h * w; }

  bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

/// Throws ShapeMismatch when a dimension is zero or the element count
/// overflows size_t.
void check_shape(const Shape& s);

/// Dense 4-D real array stored row-major in (n, c, h, w) order.
class Tensor {
 public:
  Tensor() : Tensor(Shape{}) {}
  explicit Tensor(const Shape& shape);
  Tensor(const Shape& shape, std::vector<double> values);

  static Tensor zeros(const Shape& shape) { return Tensor(shape); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t y,
                     std::size_t x) const noexcept {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) noexcept {
    return data_[offset(n, c, y, x)];
  }
  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return data_[offset(n, c, y, x)];
  }

  /// One (h, w) plane.
  std::span<double> plane(std::size_t n, std::size_t c) noexcept {
    return std::span<double>(data_).subspan(offset(n, c, 0, 0), shape_.plane());
  }
  std::span<const double> plane(std::size_t n, std::size_t c) const noexcept {
    return std::span<const double>(data_).subspan(offset(n, c, 0, 0), shape_.plane());
  }

  /// All channels of one batch entry.
  std::span<double> sample(std::size_t n) noexcept {
    return std::span<double>(data_).subspan(n * shape_.sample(), shape_.sample());
  }
  std::span<const double> sample(std::size_t n) const noexcept {
    return std::span<const double>(data_).subspan(n * shape_.sample(), shape_.sample());
  }

  /// Copy of batch entry n as a (1, c, h, w) tensor.
  Tensor slice(std::size_t n) const;

  void fill(double v) noexcept;
  bool all_finite() const noexcept;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Stacks equally shaped (1, c, h, w) tensors along the batch axis.
Tensor stack(std::span<const Tensor> samples);

/// Filter bank (out_c, in_c, kh, kw) drawn i.i.d. uniform on [-b, b] with
/// b = sqrt(6 / (in_c * kh * kw)).
Tensor he_uniform_init(const Shape& filter_shape, Rng& rng);

double he_uniform_bound(const Shape& filter_shape) noexcept;

}  // namespace cdae
