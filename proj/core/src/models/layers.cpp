#include "dfx/models/layers.hpp"

#include <algorithm>
#include <cmath>

namespace dfx::models {

namespace {

Tensor kaiming_uniform(nn::Shape shape, std::size_t fan_in, nn::Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  Tensor w = nn::sample_uniform(rng, std::move(shape), -bound, bound);
  w.set_requires_grad(true);
  return w;
}

Tensor zero_bias(std::size_t n) {
  Tensor b({n});
  b.set_requires_grad(true);
  return b;
}

}  // namespace

void require_geometry(const Tensor& x, const ImageGeometry& geometry, const char* who) {
  if (x.rank() != 4 || x.dim(1) != geometry.channels || x.dim(2) != geometry.height ||
      x.dim(3) != geometry.width) {
    throw nn::ShapeError(std::string(who) + ": expected images [B, " + std::to_string(geometry.channels) +
                         ", " + std::to_string(geometry.height) + ", " + std::to_string(geometry.width) +
                         "], got " + nn::to_string(x.shape()));
  }
}

Dense::Dense(std::size_t in, std::size_t out, nn::Rng& rng)
    : weight_(kaiming_uniform({out, in}, in, rng)), bias_(zero_bias(out)) {}

void Dense::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".weight", weight_);
  out.emplace_back(prefix + ".bias", bias_);
}

Conv2d::Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, nn::Rng& rng,
               nn::Conv2dOptions opts)
    : weight_(kaiming_uniform({out_channels, in_channels, kernel, kernel}, in_channels * kernel * kernel, rng)),
      bias_(zero_bias(out_channels)),
      opts_(opts) {}

void Conv2d::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".weight", weight_);
  out.emplace_back(prefix + ".bias", bias_);
}

BatchNorm::BatchNorm(std::size_t channels) : gamma_({channels}, 1.0), beta_(zero_bias(channels)) {
  gamma_.set_requires_grad(true);
}

void BatchNorm::collect(const std::string& prefix, NamedTensors& out) const {
  out.emplace_back(prefix + ".gamma", gamma_);
  out.emplace_back(prefix + ".beta", beta_);
}

std::vector<Tensor> ParameterSet::parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named_parameters()) out.push_back(t);
  return out;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  for (auto& [name, t] : named_parameters()) n += t.size();
  return n;
}

void ParameterSet::zero_grad() const {
  for (auto& [name, t] : named_parameters()) {
    Tensor p = t;
    p.zero_grad();
  }
}

Tensor predict_logits(const Classifier& classifier, const Tensor& images, std::size_t chunk) {
  require_geometry(images, classifier.geometry(), "predict_logits");
  Tape tape = Tape::inference();
  const std::size_t n = images.dim(0);
  if (n <= chunk) return classifier.logits(tape, images);
  std::vector<Tensor> parts;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    parts.push_back(classifier.logits(tape, images.slice_rows(begin, std::min(n, begin + chunk))));
  }
  return nn::concat_rows(parts);
}

}  // namespace dfx::models
