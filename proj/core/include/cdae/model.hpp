#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cdae/architecture.hpp"
#include "cdae/layers.hpp"

namespace cdae {

struct TrainingMeta {
  std::uint32_t epochs = 0;
  double final_lr = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const TrainingMeta&) const = default;
};

/// Activations recorded by Model::trace for the backward pass.
/// activations[0] is the input, activations[i] the output of layer i.
struct ForwardTrace {
  std::vector<Tensor> activations;
  std::vector<PoolRecord> pools;  // one per maxpool layer, in order

  const Tensor& output() const { return activations.back(); }
};

/// Parameter gradients, laid out like Model::params().
struct Gradients {
  std::vector<ConvParams> params;
  Tensor input;  // filled only when requested

  void add(const Gradients& other);
  void scale(double factor);
};

/// A CDAE instance: architecture plus one ConvParams per conv/deconv layer.
class Model {
 public:
  Model() = default;

  /// He-uniform filters, zero biases, deterministic in `seed`.
  static Model initialize(const ArchitectureSpec& spec, std::uint64_t seed);
  static Model zeros(const ArchitectureSpec& spec);

  const ArchitectureSpec& spec() const noexcept { return spec_; }
  std::span<const LayerDescriptor> layers() const noexcept { return layers_; }
  std::vector<ConvParams>& params() noexcept { return params_; }
  const std::vector<ConvParams>& params() const noexcept { return params_; }

  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t parameter_count() const noexcept;

  ConvAlgo conv_algo() const noexcept { return algo_; }
  void set_conv_algo(ConvAlgo algo) noexcept { algo_ = algo; }

  TrainingMeta meta;

  /// Full reconstruction; batch is (n, 1, input_h, input_w).
  Tensor forward(const Tensor& batch) const;

  /// Encoder only: the bottleneck activation, shape (n, c, h, w).
  Tensor encode(const Tensor& batch) const;

  /// Code vectors, one row of feature_dim() values per batch entry,
  /// flattened row-major.
  std::vector<std::vector<double>> encode_rows(const Tensor& batch) const;

  /// Forward pass that keeps every intermediate activation; `layers`
  /// limits how many layers run (default all).
  ForwardTrace trace(const Tensor& batch, std::size_t layers = SIZE_MAX) const;

  /// Backpropagates d(loss)/d(output) through a full-length trace.
  Gradients backward(const ForwardTrace& trace, const Tensor& grad_output,
                     bool want_input_grad = false) const;

  /// w <- w - lr * g for every weight and bias.
  void apply_update(const Gradients& grads, double lr);

  /// FNV-1a over all weight and bias bytes.
  std::uint64_t checksum() const noexcept;

  Gradients zero_gradients() const;

 private:
  void check_input(const Tensor& batch) const;

  ArchitectureSpec spec_;
  std::vector<LayerDescriptor> layers_;
  std::vector<std::size_t> param_index_;  // per layer; SIZE_MAX when none
  std::vector<ConvParams> params_;
  std::size_t feature_dim_ = 0;
  ConvAlgo algo_ = ConvAlgo::Im2col;

  friend Model assemble(const ArchitectureSpec& spec);
};

/// Binary model format (little-endian):
///   "CDAE" | u16 version | u32 spec length | spec text |
///   u32 epochs | f64 final_lr | u64 seed | u32 tensor count |
///   per tensor: 4 x u64 shape, then raw f64 values
/// Each conv layer contributes its weights then its bias (shape (c,1,1,1)).
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Reads only the header and spec block of a model file.
ArchitectureSpec peek_model_spec(const std::filesystem::path& path);

}  // namespace cdae
