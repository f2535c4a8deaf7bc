#include "cdae/architecture.hpp"
#include "cdae/error.hpp"

namespace cdae {

namespace {

constexpr std::string_view kPaperA = R"(# 300x140 input, 32/32/64-filter encoder, 75x35 = 2625-dimensional code
input 300 140
corrupt 0.2
conv repeat=3 filters=32 kernel=9 act=relu
maxpool size=2
conv repeat=3 filters=32 kernel=7 act=relu
maxpool size=2
conv repeat=2 filters=64 kernel=5 act=relu
conv repeat=1 filters=1 kernel=5 act=relu
bottleneck after=11
unpool size=2
deconv repeat=3 filters=32 kernel=7 act=relu
unpool size=2
deconv repeat=3 filters=32 kernel=9 act=relu
deconv repeat=1 filters=1 kernel=5 act=tanh
)";

constexpr std::string_view kPaperB = R"(# 240x120 input, 16-filter 3x3 layers, 60x30 = 1800-dimensional code
input 240 120
corrupt 0.2
conv repeat=4 filters=16 kernel=3 act=relu
maxpool size=2
conv repeat=4 filters=16 kernel=3 act=relu
maxpool size=2
conv repeat=3 filters=16 kernel=3 act=relu
conv repeat=1 filters=1 kernel=3 act=relu
bottleneck after=14
unpool size=2
deconv repeat=4 filters=16 kernel=3 act=relu
unpool size=2
deconv repeat=4 filters=16 kernel=3 act=relu
deconv repeat=1 filters=1 kernel=3 act=tanh
)";

constexpr std::string_view kDesk = R"(# paperB layout on 96x48 images, 24x12 = 288-dimensional code
input 96 48
corrupt 0.2
conv repeat=4 filters=16 kernel=3 act=relu
maxpool size=2
conv repeat=4 filters=16 kernel=3 act=relu
maxpool size=2
conv repeat=3 filters=16 kernel=3 act=relu
conv repeat=1 filters=1 kernel=3 act=relu
bottleneck after=14
unpool size=2
deconv repeat=4 filters=16 kernel=3 act=relu
unpool size=2
deconv repeat=4 filters=16 kernel=3 act=relu
deconv repeat=1 filters=1 kernel=3 act=tanh
)";

}  // namespace

std::string preset_text(std::string_view name) {
  if (name == "paperA") return std::string(kPaperA);
  if (name == "paperB") return std::string(kPaperB);
  if (name == "desk") return std::string(kDesk);
  throw_error(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"paperA", "paperB", "desk"}; }

}  // namespace cdae
