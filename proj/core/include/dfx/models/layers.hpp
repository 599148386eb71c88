#pragma once

#include <cstddef>
#include <string>

#include "dfx/nn/checkpoint.hpp"
#include "dfx/nn/ops.hpp"
#include "dfx/nn/random.hpp"

namespace dfx::models {

using nn::NamedTensors;
using nn::Tape;
using nn::Tensor;

/// Channels x height x width of one image.
struct ImageGeometry {
  std::size_t channels = 1;
  std::size_t height = 28;
  std::size_t width = 28;

  std::size_t pixels() const { return channels * height * width; }
  nn::Shape batch_shape(std::size_t batch) const { return {batch, channels, height, width}; }
  friend bool operator==(const ImageGeometry&, const ImageGeometry&) = default;
};

/// Throws nn::ShapeError unless `x` is [B, C, H, W] for this geometry.
void require_geometry(const Tensor& x, const ImageGeometry& geometry, const char* who);

/// Fully connected layer; weights Kaiming-uniform over fan-in, bias zero.
class Dense {
 public:
  Dense(std::size_t in, std::size_t out, nn::Rng& rng);

  Tensor forward(Tape& tape, const Tensor& x) const { return nn::linear(tape, x, weight_, bias_); }
  void collect(const std::string& prefix, NamedTensors& out) const;

  std::size_t in_features() const { return weight_.dim(1); }
  std::size_t out_features() const { return weight_.dim(0); }

 private:
  Tensor weight_;
  Tensor bias_;
};

/// Square-kernel convolution; weights Kaiming-uniform over fan-in, bias zero.
class Conv2d {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, nn::Rng& rng,
         nn::Conv2dOptions opts = {});

  Tensor forward(Tape& tape, const Tensor& x) const { return nn::conv2d(tape, x, weight_, bias_, opts_); }
  void collect(const std::string& prefix, NamedTensors& out) const;

  std::size_t out_channels() const { return weight_.dim(0); }

 private:
  Tensor weight_;
  Tensor bias_;
  nn::Conv2dOptions opts_;
};

/// Per-channel normalisation with batch statistics and a learned scale (ones)
/// and shift (zeros). There are no running averages.
class BatchNorm {
 public:
  explicit BatchNorm(std::size_t channels);

  Tensor forward(Tape& tape, const Tensor& x) const { return nn::batch_norm(tape, x, gamma_, beta_); }
  void collect(const std::string& prefix, NamedTensors& out) const;

 private:
  Tensor gamma_;
  Tensor beta_;
};

/// Anything that maps an image batch to class logits differentiably.
/// Attacks are written against this interface.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Tensor logits(Tape& tape, const Tensor& images) const = 0;
  virtual std::size_t classes() const = 0;
  virtual const ImageGeometry& geometry() const = 0;
};

/// Parameter bookkeeping shared by every network.
class ParameterSet {
 public:
  virtual ~ParameterSet() = default;
  virtual NamedTensors named_parameters() const = 0;

  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;
  std::uint64_t parameter_checksum() const { return nn::checksum(named_parameters()); }
  void load(const NamedTensors& source) const { nn::assign_by_name(named_parameters(), source); }
  void save(const std::filesystem::path& path) const { nn::save_checkpoint(path, named_parameters()); }
  void load(const std::filesystem::path& path) const { load(nn::load_checkpoint(path)); }
  void zero_grad() const;
};

/// Runs `classifier` on `images` in chunks without recording.
Tensor predict_logits(const Classifier& classifier, const Tensor& images, std::size_t chunk = 256);

}  // namespace dfx::models
