#pragma once

#include "dfx/models/layers.hpp"

namespace dfx::models {

struct TargetConfig {
  ImageGeometry geometry{};
  std::size_t classes = 10;
  std::size_t channels[4] = {16, 16, 32, 32};
  std::size_t hidden = 128;
};

/// Victim network: four 3x3 conv layers with two max-pool stages, then two
/// fully connected layers.
///
///   [conv, relu] x2 -> pool -> [conv, relu] x2 -> pool -> dense -> relu -> dense
///
/// Only the oracle and victim-side training code hold a TargetNet.
class TargetNet : public Classifier, public ParameterSet {
 public:
  TargetNet(const TargetConfig& config, nn::Rng& rng);

  Tensor logits(Tape& tape, const Tensor& images) const override;
  std::size_t classes() const override { return config_.classes; }
  const ImageGeometry& geometry() const override { return config_.geometry; }
  const TargetConfig& config() const { return config_; }
  NamedTensors named_parameters() const override;

 private:
  TargetConfig config_;
  Conv2d conv1_, conv2_, conv3_, conv4_;
  Dense fc1_, fc2_;
};

/// Fresh, untrained victim; identical seeds give identical parameters.
TargetNet build_target(const TargetConfig& config, std::uint64_t seed);

}  // namespace dfx::models
