#include "dfx/models/generator.hpp"

namespace dfx::models {

namespace {

const GeneratorConfig& checked(const GeneratorConfig& config) {
  const auto& g = config.geometry;
  if (config.noise_dim == 0 || config.base_channels < 4 || g.channels == 0 || g.height < 4 || g.width < 4 ||
      g.height % 4 != 0 || g.width % 4 != 0) {
    throw nn::ShapeError("generator needs positive noise_dim and image sides divisible by 4, got " +
                         std::to_string(g.channels) + "x" + std::to_string(g.height) + "x" +
                         std::to_string(g.width));
  }
  return config;
}

}  // namespace

GeneratorNet::GeneratorNet(const GeneratorConfig& config, nn::Rng& rng)
    : config_(checked(config)),
      project_(config.noise_dim, config.base_channels * (config.geometry.height / 4) * (config.geometry.width / 4),
               rng),
      project_norm_(config.base_channels),
      up1_(config.base_channels, config.base_channels / 2, 3, rng, {1, 1}),
      up1_norm_(config.base_channels / 2),
      up2_(config.base_channels / 2, config.base_channels / 4, 3, rng, {1, 1}),
      up2_norm_(config.base_channels / 4),
      to_image_(config.base_channels / 4, config.geometry.channels, 3, rng, {1, 1}),
      image_norm_(config.geometry.channels) {}

Tensor GeneratorNet::generate(Tape& tape, const Tensor& noise) const {
  if (noise.rank() != 2 || noise.dim(1) != config_.noise_dim) {
    throw nn::ShapeError("generator expects noise [B, " + std::to_string(config_.noise_dim) + "], got " +
                         nn::to_string(noise.shape()));
  }
  const std::size_t batch = noise.dim(0);
  Tensor h = project_.forward(tape, noise);
  h = nn::reshape(tape, h, {batch, config_.base_channels, config_.geometry.height / 4, config_.geometry.width / 4});
  h = nn::relu(tape, project_norm_.forward(tape, h));
  h = nn::relu(tape, up1_norm_.forward(tape, up1_.forward(tape, nn::upsample_nearest(tape, h, 2))));
  h = nn::relu(tape, up2_norm_.forward(tape, up2_.forward(tape, nn::upsample_nearest(tape, h, 2))));
  return nn::sigmoid(tape, image_norm_.forward(tape, to_image_.forward(tape, h)));
}

NamedTensors GeneratorNet::named_parameters() const {
  NamedTensors out;
  project_.collect("generator.project", out);
  project_norm_.collect("generator.project_norm", out);
  up1_.collect("generator.up1", out);
  up1_norm_.collect("generator.up1_norm", out);
  up2_.collect("generator.up2", out);
  up2_norm_.collect("generator.up2_norm", out);
  to_image_.collect("generator.to_image", out);
  image_norm_.collect("generator.image_norm", out);
  return out;
}

}  // namespace dfx::models
