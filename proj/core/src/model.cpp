#include "cdae/model.hpp"

#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "cdae/error.hpp"

namespace cdae {

namespace {

constexpr std::string_view kMagic = "CDAE";
constexpr std::size_t kNoParams = SIZE_MAX;

}  // namespace

void Gradients::add(const Gradients& other) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].weights.values();
    auto src = other.params[i].weights.values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    for (std::size_t j = 0; j < params[i].bias.size(); ++j) params[i].bias[j] += other.params[i].bias[j];
  }
}

void Gradients::scale(double factor) {
  for (auto& p : params) {
    for (double& v : p.weights.values()) v *= factor;
    for (double& v : p.bias) v *= factor;
  }
}

Model assemble(const ArchitectureSpec& spec) {
  const auto chain = validate(spec);
  Model m;
  m.spec_ = spec;
  m.layers_ = spec.expanded();
  m.param_index_.assign(m.layers_.size(), kNoParams);
  m.feature_dim_ = chain[spec.bottleneck_after].sample();
  for (std::size_t i = 0; i < m.layers_.size(); ++i) {
    const auto& l = m.layers_[i];
    if (!l.has_params()) continue;
    m.param_index_[i] = m.params_.size();
    m.params_.push_back(ConvParams::zeros(l.filters, chain[i].c, l.kernel, l.kernel));
  }
  return m;
}

Model Model::zeros(const ArchitectureSpec& spec) { return assemble(spec); }

Model Model::initialize(const ArchitectureSpec& spec, std::uint64_t seed) {
  Model m = assemble(spec);
  Rng rng(seed);
  for (auto& p : m.params_) p.weights = he_uniform_init(p.weights.shape(), rng);
  m.meta.seed = seed;
  return m;
}

std::size_t Model::parameter_count() const noexcept {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.weights.size() + p.bias.size();
  return total;
}

void Model::check_input(const Tensor& batch) const {
  const Shape& s = batch.shape();
  if (s.c != 1 || s.h != spec_.input_h || s.w != spec_.input_w)
    throw_error(ErrorCode::ShapeMismatch,
                "batch " + to_string(s) + " does not match model input (n,1," +
                    std::to_string(spec_.input_h) + "," + std::to_string(spec_.input_w) + ")");
}

ForwardTrace Model::trace(const Tensor& batch, std::size_t count) const {
  check_input(batch);
  count = std::min(count, layers_.size());
  ForwardTrace t;
  t.activations.reserve(count + 1);
  t.activations.push_back(batch);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& l = layers_[i];
    const Tensor& x = t.activations.back();
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::Deconv: {
        Tensor y = conv_forward(x, params_[param_index_[i]], algo_);
        if (l.activation != Activation::None) y = activation_forward(l.activation, y);
        t.activations.push_back(std::move(y));
        break;
      }
      case LayerKind::MaxPool: {
        auto [y, rec] = maxpool_forward(x);
        t.pools.push_back(std::move(rec));
        t.activations.push_back(std::move(y));
        break;
      }
      case LayerKind::Unpool:
        t.activations.push_back(unpool_forward(x));
        break;
      case LayerKind::Activation:
        t.activations.push_back(activation_forward(l.activation, x));
        break;
    }
  }
  return t;
}

Tensor Model::forward(const Tensor& batch) const {
  auto t = trace(batch);
  return std::move(t.activations.back());
}

Tensor Model::encode(const Tensor& batch) const {
  auto t = trace(batch, spec_.bottleneck_after);
  return std::move(t.activations.back());
}

std::vector<std::vector<double>> Model::encode_rows(const Tensor& batch) const {
  const Tensor code = encode(batch);
  std::vector<std::vector<double>> rows;
  rows.reserve(code.shape().n);
  for (std::size_t n = 0; n < code.shape().n; ++n) {
    auto s = code.sample(n);
    rows.emplace_back(s.begin(), s.end());
  }
  return rows;
}

Gradients Model::zero_gradients() const {
  Gradients g;
  g.params.reserve(params_.size());
  for (const auto& p : params_)
    g.params.push_back(ConvParams::zeros(p.out_channels(), p.in_channels(), p.kernel_h(), p.kernel_w()));
  return g;
}

Gradients Model::backward(const ForwardTrace& t, const Tensor& grad_output,
                          bool want_input_grad) const {
  if (t.activations.size() != layers_.size() + 1)
    throw_error(ErrorCode::ShapeMismatch, "backward needs a full-length trace");
  if (grad_output.shape() != t.output().shape())
    throw_error(ErrorCode::ShapeMismatch, "output gradient " + to_string(grad_output.shape()) +
                                              " vs output " + to_string(t.output().shape()));
  Gradients g = zero_gradients();
  Tensor grad = grad_output;
  std::size_t pool = t.pools.size();
  // Parameterised layers before this index have nothing upstream to feed.
  std::size_t first_param = layers_.size();
  for (std::size_t i = 0; i < layers_.size(); ++i)
    if (layers_[i].has_params()) {
      first_param = i;
      break;
    }

  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    const bool need_input = want_input_grad || i > first_param;
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::Deconv: {
        activation_backward_from_output(l.activation, t.activations[i + 1], grad);
        const std::size_t pi = param_index_[i];
        ConvGrads cg = conv_backward(t.activations[i], params_[pi], grad, algo_, need_input);
        g.params[pi].weights = std::move(cg.weights);
        g.params[pi].bias = std::move(cg.bias);
        grad = std::move(cg.input);
        break;
      }
      case LayerKind::MaxPool:
        grad = maxpool_backward(t.pools[--pool], grad);
        break;
      case LayerKind::Unpool:
        grad = unpool_backward(grad);
        break;
      case LayerKind::Activation:
        activation_backward_from_output(l.activation, t.activations[i + 1], grad);
        break;
    }
    if (!need_input) break;
  }
  if (want_input_grad) g.input = std::move(grad);
  return g;
}

void Model::apply_update(const Gradients& grads, double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto w = params_[i].weights.values();
    auto gw = grads.params[i].weights.values();
    for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * gw[j];
    for (std::size_t j = 0; j < params_[i].bias.size(); ++j)
      params_[i].bias[j] -= lr * grads.params[i].bias[j];
  }
}

std::uint64_t Model::checksum() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& p : params_) {
    for (double v : p.weights.values()) feed(v);
    for (double v : p.bias) feed(v);
  }
  return h;
}

namespace {

void write_tensor(detail::ByteWriter& w, const Shape& s, std::span<const double> values) {
  w.u64(s.n);
  w.u64(s.c);
  w.u64(s.h);
  w.u64(s.w);
  for (double v : values) w.f64(v);
}

Tensor read_tensor(detail::ByteReader& r, const Shape& expected, const std::string& what) {
  Shape s;
  s.n = r.u64();
  s.c = r.u64();
  s.h = r.u64();
  s.w = r.u64();
  if (s != expected)
    throw_error(ErrorCode::ShapeMismatch, what + " has shape " + to_string(s) + ", spec implies " +
                                              to_string(expected));
  r.need(s.count() * 8);
  std::vector<double> values(s.count());
  for (double& v : values) v = r.f64();
  return Tensor(s, std::move(values));
}

ArchitectureSpec read_header(detail::ByteReader& r) {
  r.need(kMagic.size());
  if (r.bytes(kMagic.size()) != kMagic) throw_error(ErrorCode::BadMagic, "missing CDAE magic");
  const auto version = r.u16();
  if (version != kModelFormatVersion)
    throw_error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) +
                                                ", expected " + std::to_string(kModelFormatVersion));
  const auto len = r.u32();
  return parse_spec(r.bytes(len));
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u16(kModelFormatVersion);
  const std::string text = format_spec(model.spec());
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text);
  w.u32(model.meta.epochs);
  w.f64(model.meta.final_lr);
  w.u64(model.meta.seed);
  w.u32(static_cast<std::uint32_t>(2 * model.params().size()));
  for (const auto& p : model.params()) {
    write_tensor(w, p.weights.shape(), p.weights.values());
    write_tensor(w, Shape{p.bias.size(), 1, 1, 1}, p.bias);
  }
  return std::move(w.buffer());
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "model file");
  Model m = Model::zeros(read_header(r));
  m.meta.epochs = r.u32();
  m.meta.final_lr = r.f64();
  m.meta.seed = r.u64();
  const auto count = r.u32();
  if (count != 2 * m.params().size())
    throw_error(ErrorCode::ShapeMismatch, "model file holds " + std::to_string(count) +
                                              " tensors, spec needs " +
                                              std::to_string(2 * m.params().size()));
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    auto& p = m.params()[i];
    p.weights = read_tensor(r, p.weights.shape(), "weights of conv " + std::to_string(i));
    Tensor bias = read_tensor(r, Shape{p.bias.size(), 1, 1, 1}, "bias of conv " + std::to_string(i));
    p.bias.assign(bias.values().begin(), bias.values().end());
  }
  if (r.remaining() != 0)
    throw_error(ErrorCode::ShapeMismatch, std::to_string(r.remaining()) + " trailing bytes in model file");
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  detail::write_file(path, serialize_model(model));
}

Model load_model(const std::filesystem::path& path) {
  try {
    return deserialize_model(detail::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " [" + path.string() + "]");
  }
}

ArchitectureSpec peek_model_spec(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, "model file");
  return read_header(r);
}

}  // namespace cdae
