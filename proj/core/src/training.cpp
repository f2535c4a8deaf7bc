#include "cdae/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cdae/error.hpp"
#include "cdae/parallel.hpp"

namespace cdae {

void TrainConfig::validate() const {
  if (epochs == 0) throw_error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size == 0) throw_error(ErrorCode::InvalidArgument, "batch size must be >= 1");
  if (!(lr0 >= 0.0) || !std::isfinite(lr0))
    throw_error(ErrorCode::InvalidArgument, "initial learning rate must be finite and >= 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw_error(ErrorCode::InvalidArgument, "decay must lie in (0, 1]");
  if (!(corruption_rate >= 0.0 && corruption_rate < 1.0))
    throw_error(ErrorCode::InvalidArgument, "corruption rate must lie in [0, 1)");
}

std::size_t masked_count(std::size_t count, double rate) noexcept {
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  const double exact = rate * static_cast<double>(count);
  return std::min(count, static_cast<std::size_t>(std::floor(exact + 1e-9 * std::max(1.0, exact))));
}

Corruption corrupt(const Tensor& image, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw_error(ErrorCode::InvalidArgument, "corruption rate must lie in [0, 1)");
  const std::size_t n = image.size();
  const std::size_t m = masked_count(n, rate);
  // Partial Fisher-Yates: the first m entries form a uniform m-subset.
  std::vector<std::size_t> index(n);
  std::iota(index.begin(), index.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) std::swap(index[i], index[i + rng.below(n - i)]);
  index.resize(m);
  std::sort(index.begin(), index.end());

  Corruption out{image, std::move(index)};
  for (std::size_t i : out.mask) out.corrupted[i] = 0.0;
  return out;
}

LossAndGrad mse_loss(const Tensor& recon, const Tensor& target) {
  if (recon.shape() != target.shape())
    throw_error(ErrorCode::ShapeMismatch, "reconstruction " + to_string(recon.shape()) +
                                              " vs target " + to_string(target.shape()));
  LossAndGrad out{0.0, Tensor(recon.shape())};
  const double n = static_cast<double>(recon.size());
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double d = recon[i] - target[i];
    out.loss += d * d;
    out.grad[i] = 2.0 * d / n;
  }
  out.loss /= n;
  return out;
}

double lr_at(std::size_t epoch, const TrainConfig& config) {
  return config.lr0 * std::pow(config.decay, static_cast<double>(epoch));
}

LossHistory train(Model& model, std::span<const Tensor> dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.empty()) throw_error(ErrorCode::InvalidArgument, "training set is empty");
  const Shape expected{1, 1, model.spec().input_h, model.spec().input_w};
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset[i].shape() != expected)
      throw_error(ErrorCode::ShapeMismatch, "training image " + std::to_string(i) + " has shape " +
                                                to_string(dataset[i].shape()) + ", model expects " +
                                                to_string(expected));

  LossHistory history;
  std::vector<std::size_t> order(dataset.size());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config);
    const std::uint64_t epoch_seed = Rng::mix(config.seed, epoch);
    Rng shuffle_rng(epoch_seed);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::vector<Gradients> grads(count);
      std::vector<double> losses(count);
      parallel_for(count, config.threads, [&](std::size_t j) {
        const std::size_t idx = order[start + j];
        Rng mask_rng(Rng::mix(epoch_seed, idx + 1));
        const Tensor& clean = dataset[idx];
        const Corruption noisy = corrupt(clean, config.corruption_rate, mask_rng);
        const ForwardTrace t = model.trace(noisy.corrupted);
        LossAndGrad lg = mse_loss(t.output(), clean);
        for (double& g : lg.grad.values()) g /= static_cast<double>(count);
        losses[j] = lg.loss;
        grads[j] = model.backward(t, lg.grad);
      });

      double batch_loss = 0.0;
      for (std::size_t j = 0; j < count; ++j) batch_loss += losses[j];
      if (!std::isfinite(batch_loss)) {
        std::ostringstream os;
        os << "non-finite reconstruction loss at epoch " << epoch + 1 << ", batch starting at "
           << start << " (lr " << lr << ")";
        throw_error(ErrorCode::Divergence, os.str());
      }
      loss_sum += batch_loss;
      for (std::size_t j = 1; j < count; ++j) grads[0].add(grads[j]);
      model.apply_update(grads[0], lr);
    }

    EpochStats stats{epoch + 1, lr, loss_sum / static_cast<double>(dataset.size())};
    history.push_back(stats);
    model.meta.epochs += 1;
    model.meta.final_lr = lr;
    model.meta.seed = config.seed;
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

double gradient_check(const ArchitectureSpec& spec, Rng& rng, double eps, bool include_input) {
  Model model = Model::initialize(spec, rng.next_u64());
  for (auto& p : model.params())
    for (double& b : p.bias) b = rng.uniform(-0.1, 0.1);

  Tensor input(Shape{1, 1, spec.input_h, spec.input_w});
  Tensor target(input.shape());
  for (double& v : input.values()) v = rng.uniform(-1.0, 1.0);
  for (double& v : target.values()) v = rng.uniform(-1.0, 1.0);

  const ForwardTrace t = model.trace(input);
  const LossAndGrad lg = mse_loss(t.output(), target);
  const Gradients analytic = model.backward(t, lg.grad, include_input);

  // L+ - L- evaluated as sum((r+ - r-)(r+ + r- - 2t)) / N, which keeps the
  // difference of two nearly equal losses from cancelling.
  const double n_out = static_cast<double>(target.size());
  auto loss_diff = [&](const Tensor& up, const Tensor& down) {
    double acc = 0.0;
    for (std::size_t k = 0; k < up.size(); ++k)
      acc += (up[k] - down[k]) * ((up[k] - target[k]) + (down[k] - target[k]));
    return acc / n_out;
  };

  double worst = 0.0;
  std::vector<double> a, numeric;
  auto flush = [&] {
    double aa = 0.0, nn = 0.0, ee = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      aa += a[i] * a[i];
      nn += numeric[i] * numeric[i];
      ee += (a[i] - numeric[i]) * (a[i] - numeric[i]);
    }
    const double denom = std::sqrt(std::max(aa, nn));
    if (denom > 0.0) worst = std::max(worst, std::sqrt(ee) / denom);
    a.clear();
    numeric.clear();
  };
  auto probe = [&](double& slot, double grad, const Tensor& x) {
    const double saved = slot;
    slot = saved + eps;
    const Tensor up = model.forward(x);
    slot = saved - eps;
    const Tensor down = model.forward(x);
    slot = saved;
    a.push_back(grad);
    numeric.push_back(loss_diff(up, down) / (2.0 * eps));
  };

  for (std::size_t i = 0; i < model.params().size(); ++i) {
    auto& p = model.params()[i];
    for (std::size_t j = 0; j < p.weights.size(); ++j)
      probe(p.weights[j], analytic.params[i].weights[j], input);
    flush();
    for (std::size_t j = 0; j < p.bias.size(); ++j) probe(p.bias[j], analytic.params[i].bias[j], input);
    flush();
  }
  if (include_input) {
    Tensor x = input;
    for (std::size_t j = 0; j < x.size(); ++j) probe(x[j], analytic.input[j], x);
    flush();
  }
  return worst;
}

}  // namespace cdae
