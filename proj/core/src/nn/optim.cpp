#include "dfx/nn/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dfx::nn {

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd" || name == "sgd-momentum") return OptimizerKind::SgdMomentum;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected adam or sgd)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
}

Optimizer::Optimizer(std::vector<Tensor> params, OptimizerConfig config)
    : params_(std::move(params)), config_(config) {
  config_.validate();
  for (const Tensor& p : params_) {
    first_.emplace_back(p.size(), 0.0);
    if (config_.kind == OptimizerKind::Adam) second_.emplace_back(p.size(), 0.0);
  }
}

void Optimizer::step() {
  for (const Tensor& p : params_) {
    if (!p.has_grad()) throw GradientError("optimizer step on a parameter without a gradient");
  }
  ++steps_;
  const double lr = config_.learning_rate;
  const double mu = config_.momentum;
  if (config_.kind == OptimizerKind::SgdMomentum) {
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto values = params_[k].values();
      auto grad = std::as_const(params_[k]).grad();
      auto& velocity = first_[k];
      for (std::size_t i = 0; i < values.size(); ++i) {
        velocity[i] = mu * velocity[i] + grad[i];
        values[i] -= lr * velocity[i];
      }
    }
    return;
  }
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(mu, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto values = params_[k].values();
    auto grad = std::as_const(params_[k]).grad();
    auto& m = first_[k];
    auto& v = second_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = mu * m[i] + (1.0 - mu) * grad[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Optimizer::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace dfx::nn
