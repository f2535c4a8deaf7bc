#include "cdae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdae/error.hpp"

namespace cdae {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," +
         std::to_string(s.h) + "," + std::to_string(s.w) + ")";
}

void check_shape(const Shape& s) {
  const std::size_t dims[] = {s.n, s.c, s.h, s.w};
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw_error(ErrorCode::ShapeMismatch, "empty dimension in " + to_string(s));
    if (total > std::numeric_limits<std::size_t>::max() / sizeof(double) / d)
      throw_error(ErrorCode::ShapeMismatch, "overflowing shape " + to_string(s));
    total *= d;
  }
}

Tensor::Tensor(const Shape& shape) : shape_(shape) {
  check_shape(shape);
  data_.assign(shape.count(), 0.0);
}

Tensor::Tensor(const Shape& shape, std::vector<double> values) : shape_(shape) {
  check_shape(shape);
  if (values.size() != shape.count())
    throw_error(ErrorCode::ShapeMismatch,
                std::to_string(values.size()) + " values for shape " + to_string(shape));
  data_ = std::move(values);
}

Tensor Tensor::slice(std::size_t n) const {
  Shape s = shape_;
  s.n = 1;
  auto src = sample(n);
  return Tensor(s, std::vector<double>(src.begin(), src.end()));
}

void Tensor::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor stack(std::span<const Tensor> samples) {
  if (samples.empty()) throw_error(ErrorCode::ShapeMismatch, "cannot stack zero tensors");
  Shape s = samples.front().shape();
  if (s.n != 1) throw_error(ErrorCode::ShapeMismatch, "stack expects batch-1 tensors");
  s.n = samples.size();
  Tensor out(s);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].shape() != samples.front().shape())
      throw_error(ErrorCode::ShapeMismatch,
                  "sample " + std::to_string(i) + " has shape " + to_string(samples[i].shape()));
    std::copy(samples[i].values().begin(), samples[i].values().end(), out.sample(i).begin());
  }
  return out;
}

double he_uniform_bound(const Shape& s) noexcept {
  return std::sqrt(6.0 / static_cast<double>(s.c * s.h * s.w));
}

Tensor he_uniform_init(const Shape& filter_shape, Rng& rng) {
  Tensor t(filter_shape);
  const double b = he_uniform_bound(filter_shape);
  for (double& v : t.values()) v = rng.uniform(-b, b);
  return t;
}

}  // namespace cdae
