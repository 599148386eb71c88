#include "dfx/models/substitute.hpp"

namespace dfx::models {

namespace {

std::size_t pooled_features(const SubstituteConfig& c) {
  std::size_t h = c.geometry.height, w = c.geometry.width;
  for (int i = 0; i < 3; ++i) {
    h /= 2;
    w /= 2;
  }
  if (h == 0 || w == 0 || c.classes < 2 || c.latent_dim == 0) {
    throw nn::ShapeError("substitute needs images of at least 8x8, >= 2 classes and a positive latent size");
  }
  return c.channels[2] * h * w;
}

}  // namespace

SubstituteNet::SubstituteNet(const SubstituteConfig& config, nn::Rng& rng)
    : config_(config),
      conv1_(config.geometry.channels, config.channels[0], 3, rng, {1, 1}),
      conv2_(config.channels[0], config.channels[1], 3, rng, {1, 1}),
      conv3_(config.channels[1], config.channels[2], 3, rng, {1, 1}),

      embed_(pooled_features(config), config.latent_dim, rng),
      classify_(config.latent_dim, config.classes, rng) {}

Tensor SubstituteNet::encode(Tape& tape, const Tensor& images) const {
  require_geometry(images, config_.geometry, "substitute");
  Tensor h = nn::max_pool2d(tape, nn::relu(tape, conv1_.forward(tape, images)));
  h = nn::max_pool2d(tape, nn::relu(tape, conv2_.forward(tape, h)));
  h = nn::max_pool2d(tape, nn::relu(tape, conv3_.forward(tape, h)));
  return embed_.forward(tape, nn::flatten(tape, h));
}

Tensor SubstituteNet::head(Tape& tape, const Tensor& latent) const {
  if (latent.rank() != 2 || latent.dim(1) != config_.latent_dim) {
    throw nn::ShapeError("substitute head expects [B, " + std::to_string(config_.latent_dim) + "], got " +
                         nn::to_string(latent.shape()));
  }
  return classify_.forward(tape, latent);
}

NamedTensors SubstituteNet::named_parameters() const {
  NamedTensors out;
  conv1_.collect("substitute.up.conv1", out);
  conv2_.collect("substitute.up.conv2", out);
  conv3_.collect("substitute.up.conv3", out);
  embed_.collect("substitute.up.embed", out);
  classify_.collect("substitute.down.classify", out);
  return out;
}

}  // namespace dfx::models
