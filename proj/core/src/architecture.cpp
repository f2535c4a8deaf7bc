#include "cdae/architecture.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "cdae/error.hpp"

namespace cdae {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& msg) {
  throw_error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + msg);
}

std::size_t parse_count(std::string_view s, std::size_t line_no, std::string_view what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    parse_fail(line_no, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

double parse_real(std::string_view s, std::size_t line_no, std::string_view what) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    parse_fail(line_no, "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

Activation parse_activation(std::string_view s, std::size_t line_no) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "none") return Activation::None;
  parse_fail(line_no, "unknown activation '" + std::string(s) + "'");
}

// key=value pairs after the keyword; unknown keys are rejected.
std::map<std::string, std::string_view> parse_options(const std::vector<std::string_view>& tokens,
                                                      std::size_t line_no,
                                                      std::initializer_list<std::string_view> allowed) {
  std::map<std::string, std::string_view> opts;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string_view::npos) parse_fail(line_no, "expected key=value, got '" + std::string(tokens[i]) + "'");
    std::string key(tokens[i].substr(0, eq));
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) parse_fail(line_no, "unknown option '" + key + "' for " + std::string(tokens[0]));
    opts[key] = tokens[i].substr(eq + 1);
  }
  return opts;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

[[noreturn]] void layer_fail(std::size_t index, const LayerDescriptor& l, const std::string& msg) {
  throw_error(ErrorCode::ShapeMismatch,
              "layer " + std::to_string(index) + " (" + to_string(l.kind) + "): " + msg);
}

}  // namespace

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Deconv: return "deconv";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Unpool: return "unpool";
    case LayerKind::Activation: return "activation";
  }
  return "?";
}

const char* to_string(Activation act) noexcept {
  switch (act) {
    case Activation::None: return "none";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

std::vector<LayerDescriptor> ArchitectureSpec::expanded() const {
  std::vector<LayerDescriptor> out;
  for (const auto& l : layers) {
    LayerDescriptor one = l;
    one.repeat = 1;
    for (std::size_t r = 0; r < l.repeat; ++r) out.push_back(one);
  }
  return out;
}

ArchitectureSpec parse_spec(std::string_view text) {
  ArchitectureSpec spec;
  bool have_input = false, have_bottleneck = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    const std::string_view key = tokens[0];

    if (key == "input") {
      if (tokens.size() != 3) parse_fail(line_no, "expected 'input <h> <w>'");
      spec.input_h = parse_count(tokens[1], line_no, "height");
      spec.input_w = parse_count(tokens[2], line_no, "width");
      have_input = true;
    } else if (key == "corrupt") {
      if (tokens.size() != 2) parse_fail(line_no, "expected 'corrupt <rate>'");
      spec.corruption_rate = parse_real(tokens[1], line_no, "corruption rate");
    } else if (key == "bottleneck") {
      auto opts = parse_options(tokens, line_no, {"after"});
      if (!opts.count("after")) parse_fail(line_no, "bottleneck needs after=<layer>");
      spec.bottleneck_after = parse_count(opts["after"], line_no, "bottleneck layer");
      have_bottleneck = true;
    } else if (key == "conv" || key == "deconv") {
      auto opts = parse_options(tokens, line_no, {"repeat", "filters", "kernel", "act"});
      LayerDescriptor l;
      l.kind = key == "conv" ? LayerKind::Conv : LayerKind::Deconv;
      l.repeat = opts.count("repeat") ? parse_count(opts["repeat"], line_no, "repeat") : 1;
      if (!opts.count("filters") || !opts.count("kernel"))
        parse_fail(line_no, std::string(key) + " needs filters= and kernel=");
      l.filters = parse_count(opts["filters"], line_no, "filters");
      l.kernel = parse_count(opts["kernel"], line_no, "kernel");
      l.activation = opts.count("act") ? parse_activation(opts["act"], line_no) : Activation::Relu;
      if (l.repeat == 0) parse_fail(line_no, "repeat must be >= 1");
      spec.layers.push_back(l);
    } else if (key == "maxpool" || key == "unpool") {
      auto opts = parse_options(tokens, line_no, {"size"});
      if (opts.count("size") && parse_count(opts["size"], line_no, "size") != 2)
        parse_fail(line_no, "only 2x2 pooling is supported");
      LayerDescriptor l;
      l.kind = key == "maxpool" ? LayerKind::MaxPool : LayerKind::Unpool;
      spec.layers.push_back(l);
    } else if (key == "activation") {
      auto opts = parse_options(tokens, line_no, {"act"});
      if (!opts.count("act")) parse_fail(line_no, "activation needs act=");
      LayerDescriptor l;
      l.kind = LayerKind::Activation;
      l.activation = parse_activation(opts["act"], line_no);
      spec.layers.push_back(l);
    } else {
      parse_fail(line_no, "unknown layer kind '" + std::string(key) + "'");
    }
  }
  if (!have_input) throw_error(ErrorCode::ParseError, "missing 'input <h> <w>' line");
  if (!have_bottleneck) throw_error(ErrorCode::ParseError, "missing 'bottleneck after=<layer>' line");
  validate(spec);
  return spec;
}

std::string format_spec(const ArchitectureSpec& spec) {
  std::ostringstream os;
  os << "input " << spec.input_h << ' ' << spec.input_w << '\n';
  os << "corrupt " << format_real(spec.corruption_rate) << '\n';
  for (const auto& l : spec.layers) {
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::Deconv:
        os << to_string(l.kind) << " repeat=" << l.repeat << " filters=" << l.filters
           << " kernel=" << l.kernel << " act=" << to_string(l.activation) << '\n';
        break;
      case LayerKind::MaxPool:
      case LayerKind::Unpool:
        os << to_string(l.kind) << " size=2\n";
        break;
      case LayerKind::Activation:
        os << "activation act=" << to_string(l.activation) << '\n';
        break;
    }
  }
  os << "bottleneck after=" << spec.bottleneck_after << '\n';
  return os.str();
}

std::vector<Shape> validate(const ArchitectureSpec& spec) {
  if (spec.input_h == 0 || spec.input_w == 0)
    throw_error(ErrorCode::ShapeMismatch, "input dimensions must be positive");
  if (!(spec.corruption_rate >= 0.0 && spec.corruption_rate < 1.0))
    throw_error(ErrorCode::InvalidArgument, "corruption rate must lie in [0, 1)");

  const auto layers = spec.expanded();
  if (layers.empty()) throw_error(ErrorCode::ShapeMismatch, "architecture has no layers");

  std::size_t pools = 0;
  for (const auto& l : layers) pools += l.kind == LayerKind::MaxPool;
  const std::size_t factor = std::size_t{1} << pools;

  std::vector<Shape> chain{Shape{1, 1, spec.input_h, spec.input_w}};
  std::size_t depth = 0;  // pools minus unpools so far
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::size_t index = i + 1;
    Shape s = chain.back();
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::Deconv:
        if (l.filters == 0) layer_fail(index, l, "needs at least one filter");
        if (l.kernel == 0 || l.kernel % 2 == 0)
          layer_fail(index, l, "kernel must be odd, got " + std::to_string(l.kernel));
        s.c = l.filters;
        break;
      case LayerKind::MaxPool:
        if (s.h % 2 != 0 || s.w % 2 != 0)
          layer_fail(index, l,
                     "receives " + std::to_string(s.h) + "x" + std::to_string(s.w) + ": input " +
                         std::to_string(spec.input_h) + "x" + std::to_string(spec.input_w) +
                         " is not divisible by " + std::to_string(factor) + " (" +
                         std::to_string(pools) + " pooling layers)");
        s.h /= 2;
        s.w /= 2;
        ++depth;
        break;
      case LayerKind::Unpool:
        if (depth == 0) layer_fail(index, l, "unpool without a matching maxpool");
        s.h *= 2;
        s.w *= 2;
        --depth;
        break;
      case LayerKind::Activation:
        break;
    }
    chain.push_back(s);
  }
  if (depth != 0)
    throw_error(ErrorCode::ShapeMismatch, "encoder has " + std::to_string(depth) +
                                              " more maxpool than unpool layers");
  if (chain.back() != chain.front())
    throw_error(ErrorCode::ShapeMismatch, "output shape " + to_string(chain.back()) +
                                              " differs from input " + to_string(chain.front()));
  if (spec.bottleneck_after == 0 || spec.bottleneck_after > layers.size())
    throw_error(ErrorCode::ShapeMismatch, "bottleneck after=" + std::to_string(spec.bottleneck_after) +
                                              " outside 1.." + std::to_string(layers.size()));
  return chain;
}

Shape bottleneck_shape(const ArchitectureSpec& spec) {
  return validate(spec)[spec.bottleneck_after];
}

std::size_t feature_dim(const ArchitectureSpec& spec) {
  return bottleneck_shape(spec).sample();
}

}  // namespace cdae
