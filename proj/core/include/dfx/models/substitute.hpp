#pragma once

#include "dfx/models/layers.hpp"

namespace dfx::models {

struct SubstituteConfig {
  ImageGeometry geometry{};
  std::size_t classes = 10;
  std::size_t latent_dim = 128;
  std::size_t channels[3] = {32, 64, 128};
};

/// The attacker's classifier, split into an upstream encoder and a
/// downstream head so the generator losses can read the latent code:
///
///   encode: 3 x [conv3x3, relu, maxpool2] -> flatten -> dense(latent_dim)
///   head:   dense(latent_dim -> classes)
///
/// logits(x) is computed as head(encode(x)), nothing else.
class SubstituteNet : public Classifier, public ParameterSet {
 public:
  SubstituteNet(const SubstituteConfig& config, nn::Rng& rng);

  Tensor encode(Tape& tape, const Tensor& images) const;
  Tensor head(Tape& tape, const Tensor& latent) const;
  Tensor logits(Tape& tape, const Tensor& images) const override { return head(tape, encode(tape, images)); }

  std::size_t classes() const override { return config_.classes; }
  const ImageGeometry& geometry() const override { return config_.geometry; }
  std::size_t latent_dim() const { return config_.latent_dim; }
  NamedTensors named_parameters() const override;

 private:
  SubstituteConfig config_;
  Conv2d conv1_;
  Conv2d conv2_;
  Conv2d conv3_;
  Dense embed_;
  Dense classify_;
};

}  // namespace dfx::models
