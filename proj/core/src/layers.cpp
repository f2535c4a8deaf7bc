#include "cdae/layers.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "cdae/error.hpp"

namespace cdae {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

// Target size of one patch-matrix chunk, in doubles.
constexpr std::size_t kColBudget = std::size_t{1} << 20;

void check_conv(const Tensor& input, const ConvParams& p) {
  const Shape& ws = p.weights.shape();
  if (ws.h % 2 == 0 || ws.w % 2 == 0)
    throw_error(ErrorCode::ShapeMismatch, "kernel must be odd, got " + to_string(ws));
  if (p.bias.size() != ws.n)
    throw_error(ErrorCode::ShapeMismatch, "bias length " + std::to_string(p.bias.size()) +
                                              " != out channels " + std::to_string(ws.n));
  if (input.shape().c != ws.c)
    throw_error(ErrorCode::ShapeMismatch, "input has " + std::to_string(input.shape().c) +
                                              " channels, filters expect " + std::to_string(ws.c));
}

// Valid x range [lo, hi) for a kernel tap at horizontal offset dx.
inline void tap_range(std::ptrdiff_t dx, std::size_t w, std::size_t& lo, std::size_t& hi) {
  lo = dx < 0 ? std::min(static_cast<std::size_t>(-dx), w) : 0;
  hi = dx > 0 ? (static_cast<std::size_t>(dx) >= w ? 0 : w - static_cast<std::size_t>(dx)) : w;
  if (hi < lo) hi = lo;
}

// Source column of output column x0 under tap offset dx; x0 + dx >= 0 by
// construction of tap_range.
inline std::size_t shifted(std::size_t x0, std::ptrdiff_t dx) {
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x0) + dx);
}

Tensor conv_forward_direct(const Tensor& input, const ConvParams& p) {
  const Shape& is = input.shape();
  const std::size_t oc_n = p.out_channels(), kh = p.kernel_h(), kw = p.kernel_w();
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2), pw = static_cast<std::ptrdiff_t>(kw / 2);
  Tensor out(Shape{is.n, oc_n, is.h, is.w});
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t oc = 0; oc < oc_n; ++oc) {
      auto o = out.plane(n, oc);
      std::fill(o.begin(), o.end(), p.bias[oc]);
      for (std::size_t ic = 0; ic < is.c; ++ic) {
        auto in = input.plane(n, ic);
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const double wv = p.weights.at(oc, ic, ky, kx);
            const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - ph;
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pw;
            std::size_t x0, x1;
            tap_range(dx, is.w, x0, x1);
            for (std::size_t y = 0; y < is.h; ++y) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) + dy;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(is.h)) continue;
              const double* src = in.data() + static_cast<std::size_t>(iy) * is.w + shifted(x0, dx);
              double* dst = o.data() + y * is.w + x0;
              for (std::size_t x = 0; x < x1 - x0; ++x) dst[x] += wv * src[x];
            }
          }
        }
      }
    }
  }
  return out;
}

ConvGrads conv_backward_direct(const Tensor& input, const ConvParams& p, const Tensor& grad_out,
                               bool want_input_grad) {
  const Shape& is = input.shape();
  const std::size_t oc_n = p.out_channels(), kh = p.kernel_h(), kw = p.kernel_w();
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2), pw = static_cast<std::ptrdiff_t>(kw / 2);
  ConvGrads g{want_input_grad ? Tensor(is) : Tensor(), Tensor(p.weights.shape()),
              std::vector<double>(oc_n, 0.0)};
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t oc = 0; oc < oc_n; ++oc) {
      auto go = grad_out.plane(n, oc);
      for (double v : go) g.bias[oc] += v;
      for (std::size_t ic = 0; ic < is.c; ++ic) {
        auto in = input.plane(n, ic);
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const double wv = p.weights.at(oc, ic, ky, kx);
            const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - ph;
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pw;
            std::size_t x0, x1;
            tap_range(dx, is.w, x0, x1);
            double acc = 0.0;
            for (std::size_t y = 0; y < is.h; ++y) {
              const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) + dy;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(is.h)) continue;
              const std::size_t row = static_cast<std::size_t>(iy) * is.w + shifted(x0, dx);
              const double* gsrc = go.data() + y * is.w + x0;
              const double* src = in.data() + row;
              for (std::size_t x = 0; x < x1 - x0; ++x) acc += gsrc[x] * src[x];
              if (want_input_grad) {
                double* gi = g.input.plane(n, ic).data() + row;
                for (std::size_t x = 0; x < x1 - x0; ++x) gi[x] += wv * gsrc[x];
              }
            }
            g.weights.at(oc, ic, ky, kx) += acc;
          }
        }
      }
    }
  }
  return g;
}

// Patch matrix for output rows [y0, y1) of sample n: K = in_c*kh*kw rows,
// (y1 - y0) * w columns, zero where the tap falls into the padding.
void im2col(const Tensor& input, std::size_t n, std::size_t kh, std::size_t kw, std::size_t y0,
            std::size_t y1, double* col) {
  const Shape& is = input.shape();
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2), pw = static_cast<std::ptrdiff_t>(kw / 2);
  const std::size_t cols = (y1 - y0) * is.w;
  for (std::size_t ic = 0; ic < is.c; ++ic) {
    const double* in = input.plane(n, ic).data();
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx, col += cols) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - ph;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pw;
        std::size_t x0, x1;
        tap_range(dx, is.w, x0, x1);
        for (std::size_t y = y0; y < y1; ++y) {
          double* dst = col + (y - y0) * is.w;
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) + dy;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(is.h)) {
            std::fill(dst, dst + is.w, 0.0);
            continue;
          }
          const double* src = in + static_cast<std::size_t>(iy) * is.w + shifted(x0, dx);
          std::fill(dst, dst + x0, 0.0);
          std::copy(src, src + (x1 - x0), dst + x0);
          std::fill(dst + x1, dst + is.w, 0.0);
        }
      }
    }
  }
}

// Scatter-add of a patch-matrix gradient back into sample n of grad_in.
void col2im(const double* col, std::size_t n, std::size_t kh, std::size_t kw, std::size_t y0,
            std::size_t y1, Tensor& grad_in) {
  const Shape& is = grad_in.shape();
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2), pw = static_cast<std::ptrdiff_t>(kw / 2);
  const std::size_t cols = (y1 - y0) * is.w;
  for (std::size_t ic = 0; ic < is.c; ++ic) {
    double* gi = grad_in.plane(n, ic).data();
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx, col += cols) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - ph;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pw;
        std::size_t x0, x1;
        tap_range(dx, is.w, x0, x1);
        for (std::size_t y = y0; y < y1; ++y) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y) + dy;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(is.h)) continue;
          const double* src = col + (y - y0) * is.w + x0;
          double* dst = gi + static_cast<std::size_t>(iy) * is.w + shifted(x0, dx);
          for (std::size_t x = 0; x < x1 - x0; ++x) dst[x] += src[x];
        }
      }
    }
  }
}

std::size_t rows_per_chunk(std::size_t k, const Shape& s) {
  return std::clamp<std::size_t>(kColBudget / std::max<std::size_t>(1, k * s.w), 1, s.h);
}

Tensor conv_forward_im2col(const Tensor& input, const ConvParams& p) {
  const Shape& is = input.shape();
  const std::size_t oc_n = p.out_channels(), kh = p.kernel_h(), kw = p.kernel_w();
  const std::size_t k = is.c * kh * kw;
  const std::size_t chunk = rows_per_chunk(k, is);
  Tensor out(Shape{is.n, oc_n, is.h, is.w});
  ConstRowMap weights(p.weights.data(), static_cast<Eigen::Index>(oc_n), static_cast<Eigen::Index>(k));
  std::vector<double> col(k * chunk * is.w);
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t y0 = 0; y0 < is.h; y0 += chunk) {
      const std::size_t y1 = std::min(is.h, y0 + chunk);
      const auto cols = static_cast<Eigen::Index>((y1 - y0) * is.w);
      im2col(input, n, kh, kw, y0, y1, col.data());
      ConstRowMap patches(col.data(), static_cast<Eigen::Index>(k), cols);
      StridedMap dst(out.plane(n, 0).data() + y0 * is.w, static_cast<Eigen::Index>(oc_n), cols,
                     Eigen::OuterStride<>(static_cast<Eigen::Index>(is.plane())));
      dst.noalias() = weights * patches;
      for (std::size_t oc = 0; oc < oc_n; ++oc) dst.row(static_cast<Eigen::Index>(oc)).array() += p.bias[oc];
    }
  }
  return out;
}

ConvGrads conv_backward_im2col(const Tensor& input, const ConvParams& p, const Tensor& grad_out,
                               bool want_input_grad) {
  const Shape& is = input.shape();
  const std::size_t oc_n = p.out_channels(), kh = p.kernel_h(), kw = p.kernel_w();
  const std::size_t k = is.c * kh * kw;
  const std::size_t chunk = rows_per_chunk(k, is);
  ConvGrads g{want_input_grad ? Tensor(is) : Tensor(), Tensor(p.weights.shape()),
              std::vector<double>(oc_n, 0.0)};
  ConstRowMap weights(p.weights.data(), static_cast<Eigen::Index>(oc_n), static_cast<Eigen::Index>(k));
  RowMap grad_w(g.weights.data(), static_cast<Eigen::Index>(oc_n), static_cast<Eigen::Index>(k));
  std::vector<double> col(k * chunk * is.w);
  std::vector<double> grad_col(want_input_grad ? col.size() : 0);
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t oc = 0; oc < oc_n; ++oc)
      for (double v : grad_out.plane(n, oc)) g.bias[oc] += v;
    for (std::size_t y0 = 0; y0 < is.h; y0 += chunk) {
      const std::size_t y1 = std::min(is.h, y0 + chunk);
      const auto cols = static_cast<Eigen::Index>((y1 - y0) * is.w);
      im2col(input, n, kh, kw, y0, y1, col.data());
      ConstRowMap patches(col.data(), static_cast<Eigen::Index>(k), cols);
      ConstStridedMap go(grad_out.plane(n, 0).data() + y0 * is.w, static_cast<Eigen::Index>(oc_n),
                         cols, Eigen::OuterStride<>(static_cast<Eigen::Index>(is.plane())));
      grad_w.noalias() += go * patches.transpose();
      if (want_input_grad) {
        RowMap gc(grad_col.data(), static_cast<Eigen::Index>(k), cols);
        gc.noalias() = weights.transpose() * go;
        col2im(grad_col.data(), n, kh, kw, y0, y1, g.input);
      }
    }
  }
  return g;
}

}  // namespace

ConvParams ConvParams::zeros(std::size_t out_c, std::size_t in_c, std::size_t kh, std::size_t kw) {
  return ConvParams{Tensor(Shape{out_c, in_c, kh, kw}), std::vector<double>(out_c, 0.0)};
}

ConvParams ConvParams::he_uniform(std::size_t out_c, std::size_t in_c, std::size_t kh,
                                  std::size_t kw, Rng& rng) {
  return ConvParams{he_uniform_init(Shape{out_c, in_c, kh, kw}, rng),
                    std::vector<double>(out_c, 0.0)};
}

Tensor conv_forward(const Tensor& input, const ConvParams& p, ConvAlgo algo) {
  check_conv(input, p);
  return algo == ConvAlgo::Direct ? conv_forward_direct(input, p) : conv_forward_im2col(input, p);
}

ConvGrads conv_backward(const Tensor& input, const ConvParams& p, const Tensor& grad_out,
                        ConvAlgo algo, bool want_input_grad) {
  check_conv(input, p);
  const Shape& is = input.shape();
  if (grad_out.shape() != Shape{is.n, p.out_channels(), is.h, is.w})
    throw_error(ErrorCode::ShapeMismatch, "conv grad_out " + to_string(grad_out.shape()) +
                                              " does not match forward output");
  return algo == ConvAlgo::Direct ? conv_backward_direct(input, p, grad_out, want_input_grad)
                                  : conv_backward_im2col(input, p, grad_out, want_input_grad);
}

std::pair<Tensor, PoolRecord> maxpool_forward(const Tensor& input) {
  const Shape& is = input.shape();
  if (is.h % 2 != 0 || is.w % 2 != 0)
    throw_error(ErrorCode::ShapeMismatch, "maxpool needs even spatial dims, got " + to_string(is));
  const std::size_t oh = is.h / 2, ow = is.w / 2;
  Tensor out(Shape{is.n, is.c, oh, ow});
  PoolRecord rec{is, std::vector<std::uint8_t>(out.size())};
  std::size_t o = 0;
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t c = 0; c < is.c; ++c) {
      const double* in = input.plane(n, c).data();
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x, ++o) {
          const double* top = in + 2 * y * is.w + 2 * x;
          const double window[4] = {top[0], top[1], top[is.w], top[is.w + 1]};
          std::uint8_t best = 0;
          for (std::uint8_t k = 1; k < 4; ++k)
            if (window[k] > window[best]) best = k;
          out[o] = window[best];
          rec.argmax[o] = best;
        }
      }
    }
  }
  return {std::move(out), std::move(rec)};
}

Tensor maxpool_backward(const PoolRecord& record, const Tensor& grad_out) {
  const Shape& is = record.input_shape;
  if (grad_out.shape() != Shape{is.n, is.c, is.h / 2, is.w / 2} ||
      record.argmax.size() != grad_out.size())
    throw_error(ErrorCode::ShapeMismatch, "maxpool grad_out " + to_string(grad_out.shape()) +
                                              " does not match record for " + to_string(is));
  Tensor grad_in(is);
  const std::size_t oh = is.h / 2, ow = is.w / 2;
  std::size_t o = 0;
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t c = 0; c < is.c; ++c) {
      double* gi = grad_in.plane(n, c).data();
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x, ++o) {
          const std::uint8_t k = record.argmax[o];
          gi[(2 * y + k / 2) * is.w + 2 * x + k % 2] += grad_out[o];
        }
      }
    }
  }
  return grad_in;
}

Tensor unpool_forward(const Tensor& input) {
  const Shape& is = input.shape();
  Tensor out(Shape{is.n, is.c, 2 * is.h, 2 * is.w});
  const std::size_t ow = 2 * is.w;
  for (std::size_t n = 0; n < is.n; ++n) {
    for (std::size_t c = 0; c < is.c; ++c) {
      const double* in = input.plane(n, c).data();
      double* o = out.plane(n, c).data();
      for (std::size_t y = 0; y < is.h; ++y) {
        double* r0 = o + 2 * y * ow;
        double* r1 = r0 + ow;
        for (std::size_t x = 0; x < is.w; ++x) {
          const double v = in[y * is.w + x];
          r0[2 * x] = r0[2 * x + 1] = r1[2 * x] = r1[2 * x + 1] = v;
        }
      }
    }
  }
  return out;
}

Tensor unpool_backward(const Tensor& grad_out) {
  const Shape& gs = grad_out.shape();
  if (gs.h % 2 != 0 || gs.w % 2 != 0)
    throw_error(ErrorCode::ShapeMismatch, "unpool grad needs even spatial dims, got " + to_string(gs));
  Tensor grad_in(Shape{gs.n, gs.c, gs.h / 2, gs.w / 2});
  const std::size_t iw = gs.w / 2;
  for (std::size_t n = 0; n < gs.n; ++n) {
    for (std::size_t c = 0; c < gs.c; ++c) {
      const double* g = grad_out.plane(n, c).data();
      double* gi = grad_in.plane(n, c).data();
      for (std::size_t y = 0; y < gs.h / 2; ++y) {
        const double* r0 = g + 2 * y * gs.w;
        const double* r1 = r0 + gs.w;
        for (std::size_t x = 0; x < iw; ++x)
          gi[y * iw + x] = (r0[2 * x] + r0[2 * x + 1]) + (r1[2 * x] + r1[2 * x + 1]);
      }
    }
  }
  return grad_in;
}

Tensor activation_forward(Activation kind, const Tensor& x) {
  Tensor y = x;
  switch (kind) {
    case Activation::None: break;
    case Activation::Relu:
      for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::Tanh:
      for (double& v : y.values()) v = std::tanh(v);
      break;
  }
  return y;
}

Tensor activation_backward(Activation kind, const Tensor& x, const Tensor& grad_out) {
  if (x.shape() != grad_out.shape())
    throw_error(ErrorCode::ShapeMismatch, "activation grad " + to_string(grad_out.shape()) +
                                              " vs input " + to_string(x.shape()));
  Tensor g = grad_out;
  switch (kind) {
    case Activation::None: break;
    case Activation::Relu:
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(x[i] > 0.0)) g[i] = 0.0;
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = std::tanh(x[i]);
        g[i] *= 1.0 - t * t;
      }
      break;
  }
  return g;
}

void activation_backward_from_output(Activation kind, const Tensor& y, Tensor& grad) {
  if (y.shape() != grad.shape())
    throw_error(ErrorCode::ShapeMismatch, "activation grad " + to_string(grad.shape()) +
                                              " vs output " + to_string(y.shape()));
  switch (kind) {
    case Activation::None: break;
    case Activation::Relu:
      for (std::size_t i = 0; i < grad.size(); ++i)
        if (!(y[i] > 0.0)) grad[i] = 0.0;
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - y[i] * y[i];
      break;
  }
}

}  // namespace cdae
