#pragma once

#include "dfx/models/layers.hpp"

namespace dfx::models {

struct GeneratorConfig {
  std::size_t noise_dim = 100;
  ImageGeometry geometry{};
  std::size_t base_channels = 64;
};

/// Decoder from a noise vector to an image in [0, 1]:
/// dense -> (base, H/4, W/4) -> bn, relu -> 2 x [upsample x2, conv3x3, bn, relu] -> conv3x3 -> bn -> sigmoid.
/// Normalisation always uses the statistics of the batch being generated.
class GeneratorNet : public ParameterSet {
 public:
  GeneratorNet(const GeneratorConfig& config, nn::Rng& rng);

  /// noise [B, noise_dim] -> images [B, C, H, W], differentiable in the parameters.
  Tensor generate(Tape& tape, const Tensor& noise) const;

  std::size_t noise_dim() const { return config_.noise_dim; }
  const ImageGeometry& geometry() const { return config_.geometry; }
  NamedTensors named_parameters() const override;

 private:
  GeneratorConfig config_;
  Dense project_;
  BatchNorm project_norm_;
  Conv2d up1_;
  BatchNorm up1_norm_;
  Conv2d up2_;
  BatchNorm up2_norm_;
  Conv2d to_image_;
  BatchNorm image_norm_;
};

}  // namespace dfx::models
