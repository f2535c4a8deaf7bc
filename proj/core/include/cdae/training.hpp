#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cdae/model.hpp"
#include "cdae/rng.hpp"

namespace cdae {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double lr0 = 0.05;
  double decay = 0.9;
  double corruption_rate = 0.2;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

/// Masking noise: exactly floor(rate * N) positions zeroed.
struct Corruption {
  Tensor corrupted;
  std::vector<std::size_t> mask;  // zeroed flat indices, ascending
};

Corruption corrupt(const Tensor& image, double rate, Rng& rng);

/// Number of positions corrupt() zeroes for `count` values.
std::size_t masked_count(std::size_t count, double rate) noexcept;

struct LossAndGrad {
  double loss = 0.0;
  Tensor grad;
};

/// mean((recon - target)^2) and its gradient 2 (recon - target) / N.
LossAndGrad mse_loss(const Tensor& recon, const Tensor& target);

/// lr0 * decay^epoch, epoch counted from 0.
double lr_at(std::size_t epoch, const TrainConfig& config);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;
  double mean_mse = 0.0;
};

using LossHistory = std::vector<EpochStats>;

/// Called after every epoch; used for the CSV training log.
using EpochCallback = std::function<void(const EpochStats&)>;

/// Plain mini-batch SGD on the masked-input reconstruction objective.
/// `dataset` holds clean (1, 1, h, w) images. Sample order is shuffled per
/// epoch and each presentation draws a fresh mask; both derive from
/// config.seed, and per-sample gradients are summed in a fixed order, so
/// the result is independent of config.threads. Throws Divergence on a
/// non-finite loss.
LossHistory train(Model& model, std::span<const Tensor> dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Compares backpropagated gradients of an MSE loss against central
/// differences for every parameter (and, when `include_input`, every input
/// value) of a randomly initialised model built from `spec`. Each gradient
/// block (one layer's weights, one layer's biases, the input) is scored by
/// ||a - n|| / max(||a||, ||n||); the largest block score is returned.
double gradient_check(const ArchitectureSpec& spec, Rng& rng, double eps = 1e-5,
                      bool include_input = true);

}  // namespace cdae
