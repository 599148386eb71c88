#include "dfx/models/target.hpp"

namespace dfx::models {

namespace {

std::size_t flat_features(const TargetConfig& c) {
  const std::size_t h = c.geometry.height / 4, w = c.geometry.width / 4;
  if (h == 0 || w == 0 || c.classes < 2 || c.geometry.channels == 0) {
    throw nn::ShapeError("target needs images of at least 4x4 and >= 2 classes");
  }
  return c.channels[3] * h * w;
}

}  // namespace

TargetNet::TargetNet(const TargetConfig& config, nn::Rng& rng)
    : config_(config),
      conv1_(config.geometry.channels, config.channels[0], 3, rng, {1, 1}),
      conv2_(config.channels[0], config.channels[1], 3, rng, {1, 1}),
      conv3_(config.channels[1], config.channels[2], 3, rng, {1, 1}),
      conv4_(config.channels[2], config.channels[3], 3, rng, {1, 1}),
      fc1_(flat_features(config), config.hidden, rng),
      fc2_(config.hidden, config.classes, rng) {}

Tensor TargetNet::logits(Tape& tape, const Tensor& images) const {
  require_geometry(images, config_.geometry, "target");
  Tensor h = nn::relu(tape, conv1_.forward(tape, images));
  h = nn::max_pool2d(tape, nn::relu(tape, conv2_.forward(tape, h)));
  h = nn::relu(tape, conv3_.forward(tape, h));
  h = nn::max_pool2d(tape, nn::relu(tape, conv4_.forward(tape, h)));
  h = nn::relu(tape, fc1_.forward(tape, nn::flatten(tape, h)));
  return fc2_.forward(tape, h);
}

NamedTensors TargetNet::named_parameters() const {
  NamedTensors out;
  conv1_.collect("target.conv1", out);
  conv2_.collect("target.conv2", out);
  conv3_.collect("target.conv3", out);
  conv4_.collect("target.conv4", out);
  fc1_.collect("target.fc1", out);
  fc2_.collect("target.fc2", out);
  return out;
}

TargetNet build_target(const TargetConfig& config, std::uint64_t seed) {
  nn::Rng rng(seed);
  return TargetNet(config, rng);
}

}  // namespace dfx::models
