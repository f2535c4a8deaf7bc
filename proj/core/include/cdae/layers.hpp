#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "cdae/tensor.hpp"

namespace cdae {

/// Filter bank for a same-padded, stride-1 convolution. Deconvolution
/// layers use the same parameters and kernels.
struct ConvParams {
  Tensor weights;             // (out_c, in_c, kh, kw), kh and kw odd
  std::vector<double> bias;   // out_c

  std::size_t out_channels() const noexcept { return weights.shape().n; }
  std::size_t in_channels() const noexcept { return weights.shape().c; }
  std::size_t kernel_h() const noexcept { return weights.shape().h; }
  std::size_t kernel_w() const noexcept { return weights.shape().w; }

  /// Zero weights and bias.
  static ConvParams zeros(std::size_t out_c, std::size_t in_c, std::size_t kh, std::size_t kw);
  /// He-uniform weights, zero bias.
  static ConvParams he_uniform(std::size_t out_c, std::size_t in_c, std::size_t kh,
                               std::size_t kw, Rng& rng);
};

enum class ConvAlgo {
  Direct,  // reference nested loops
  Im2col,  // patch matrix + GEMM
};

struct ConvGrads {
  Tensor input;   // empty (default shape) when not requested
  Tensor weights;
  std::vector<double> bias;
};

Tensor conv_forward(const Tensor& input, const ConvParams& p, ConvAlgo algo = ConvAlgo::Im2col);

ConvGrads conv_backward(const Tensor& input, const ConvParams& p, const Tensor& grad_out,
                        ConvAlgo algo = ConvAlgo::Im2col, bool want_input_grad = true);

/// Argmax of every 2x2 window as a row-major offset 0..3.
struct PoolRecord {
  Shape input_shape;
  std::vector<std::uint8_t> argmax;
};

/// 2x2, stride 2. Ties resolve to the smallest offset.
std::pair<Tensor, PoolRecord> maxpool_forward(const Tensor& input);
Tensor maxpool_backward(const PoolRecord& record, const Tensor& grad_out);

/// Fills every 2x2 output block with its input value.
Tensor unpool_forward(const Tensor& input);
/// Adjoint of unpool_forward: block sums.
Tensor unpool_backward(const Tensor& grad_out);

enum class Activation { None, Relu, Tanh };

Tensor activation_forward(Activation kind, const Tensor& x);
/// Gradient with respect to the pre-activation x.
Tensor activation_backward(Activation kind, const Tensor& x, const Tensor& grad_out);
/// Same, using the activation output y = f(x) instead of x.
void activation_backward_from_output(Activation kind, const Tensor& y, Tensor& grad);

}  // namespace cdae
