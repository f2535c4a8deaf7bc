#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cdae/layers.hpp"
#include "cdae/tensor.hpp"

namespace cdae {

enum class LayerKind { Conv, Deconv, MaxPool, Unpool, Activation };

const char* to_string(LayerKind kind) noexcept;
const char* to_string(Activation act) noexcept;

/// One line of an architecture file. `repeat` copies of conv/deconv lines
/// are expanded into separate layers, each followed by `activation`.
struct LayerDescriptor {
  LayerKind kind = LayerKind::Conv;
  std::size_t repeat = 1;
  std::size_t filters = 0;
  std::size_t kernel = 0;
  Activation activation = Activation::None;

  bool has_params() const noexcept {
    return kind == LayerKind::Conv || kind == LayerKind::Deconv;
  }
  bool operator==(const LayerDescriptor&) const = default;
};

/// A CDAE as data: input size, masking rate, ordered layers, and the
/// (1-based, repeats expanded) layer whose output is the code vector.
struct ArchitectureSpec {
  std::size_t input_h = 0;
  std::size_t input_w = 0;
  double corruption_rate = 0.2;
  std::vector<LayerDescriptor> layers;
  std::size_t bottleneck_after = 0;

  /// Layers with repeat counts unrolled; every entry has repeat == 1.
  std::vector<LayerDescriptor> expanded() const;

  bool operator==(const ArchitectureSpec&) const = default;
};

/// Parses the line-oriented architecture format:
///
///     # comment
///     input 240 120
///     corrupt 0.20
///     conv repeat=4 filters=16 kernel=3 act=relu
///     maxpool size=2
///     ...
///     unpool size=2
///     deconv filters=1 kernel=3 act=tanh
///     bottleneck after=14
///
/// `bottleneck after=K` counts layers after repeat expansion, starting at 1.
/// conv/deconv default to repeat=1 and act=relu. The result is validated.
ArchitectureSpec parse_spec(std::string_view text);

/// Canonical text form; parse_spec(format_spec(s)) == s.
std::string format_spec(const ArchitectureSpec& spec);

/// Checks every structural invariant and returns the shape chain:
/// element 0 is the (1, 1, h, w) input, element i the output of expanded
/// layer i. Throws ShapeMismatch/ParseError naming the offending layer.
std::vector<Shape> validate(const ArchitectureSpec& spec);

/// Bottleneck activation shape for a batch of one.
Shape bottleneck_shape(const ArchitectureSpec& spec);

/// Length of the code vector (bottleneck c*h*w), computed from the spec alone.
std::size_t feature_dim(const ArchitectureSpec& spec);

/// Built-in architectures: "paperA" (300x140, 2625 features), "paperB"
/// (240x120, 1800 features), "desk" (96x48, 288 features).
std::string preset_text(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace cdae
