#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dfx/nn/tensor.hpp"

namespace dfx::nn {

enum class OptimizerKind { SgdMomentum, Adam };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  /// SGD momentum coefficient, or Adam's beta1.
  double momentum = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// SGD with momentum (v = m*v + g; p -= lr*v) or bias-corrected Adam.
/// step() reads grads and leaves them untouched; zero_grad() clears them.
class Optimizer {
 public:
  Optimizer(std::vector<Tensor> params, OptimizerConfig config);

  void step();
  void zero_grad();

  std::size_t steps() const { return steps_; }
  const OptimizerConfig& config() const { return config_; }
  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  OptimizerConfig config_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  std::size_t steps_ = 0;
};

}  // namespace dfx::nn
