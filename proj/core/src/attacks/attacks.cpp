#include "dfx/attacks/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfx::attacks {

std::string to_string(AttackMethod method) {
  switch (method) {
    case AttackMethod::Fgsm: return "fgsm";
    case AttackMethod::Bim: return "bim";
    case AttackMethod::Pgd: return "pgd";
  }
  return "unknown";
}

AttackMethod parse_attack_method(const std::string& name) {
  if (name == "fgsm") return AttackMethod::Fgsm;
  if (name == "bim") return AttackMethod::Bim;
  if (name == "pgd") return AttackMethod::Pgd;
  throw std::invalid_argument("unknown attack '" + name + "' (expected fgsm, bim or pgd)");
}

std::optional<std::string> AttackConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (steps == 0) throw std::invalid_argument("attack steps must be at least 1");
  if (step_size < 0.0 || !std::isfinite(step_size)) throw std::invalid_argument("step size must be positive");
  if (targeted && target_class && *target_class < 0) throw std::invalid_argument("target class must be >= 0");
  if (method != AttackMethod::Fgsm && effective_step_size() > epsilon) {
    return "step size " + std::to_string(effective_step_size()) + " exceeds epsilon " + std::to_string(epsilon);
  }
  return std::nullopt;
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<int> resolve_labels(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
                                const AttackConfig& config) {
  models::require_geometry(images, model.geometry(), "attack");
  const std::size_t n = images.dim(0);
  if (config.targeted && config.target_class) return std::vector<int>(n, *config.target_class);
  if (labels.size() != n) {
    throw nn::ShapeError("attack needs one label per image (" + std::to_string(n) + "), got " +
                         std::to_string(labels.size()));
  }
  return {labels.begin(), labels.end()};
}

// One signed step from `current`, projected onto [0, 1] then onto the ball around `origin`.
void signed_step(Tensor& current, const Tensor& origin, const Tensor& grad, double step, double epsilon,
                 bool targeted) {
  const double direction = targeted ? -1.0 : 1.0;
  for (std::size_t i = 0; i < current.size(); ++i) {
    const double moved = std::clamp(current[i] + direction * step * sign(grad[i]), 0.0, 1.0);
    current[i] = std::min(std::max(moved, origin[i] - epsilon), origin[i] + epsilon);
  }
}

Tensor iterate(const models::Classifier& model, const Tensor& images, Tensor start, const std::vector<int>& labels,
               const AttackConfig& config, double step, std::size_t steps) {
  Tensor current = std::move(start);
  for (std::size_t t = 0; t < steps; ++t) {
    const Tensor grad = input_gradient(model, current, labels);
    signed_step(current, images, grad, step, config.epsilon, config.targeted);
  }
  return current;
}

}  // namespace

Tensor input_gradient(const models::Classifier& model, const Tensor& images, std::span<const int> labels) {
  nn::Tape tape;
  Tensor x = images.clone();
  x.set_requires_grad(true);
  const Tensor loss = nn::softmax_cross_entropy(tape, model.logits(tape, x), nn::one_hot(labels, model.classes()));
  tape.backward(loss);
  Tensor grad(x.shape(), std::vector<double>(x.grad().begin(), x.grad().end()));
  nn::check_finite(grad, "attack input gradient");
  return grad;
}

Tensor fgsm(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
            const AttackConfig& config) {
  config.validate();
  const auto resolved = resolve_labels(model, images, labels, config);
  return iterate(model, images, images.clone(), resolved, config, config.epsilon, 1);
}

Tensor bim(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
           const AttackConfig& config) {
  config.validate();
  const auto resolved = resolve_labels(model, images, labels, config);
  return iterate(model, images, images.clone(), resolved, config, config.effective_step_size(), config.steps);
}

Tensor pgd(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
           const AttackConfig& config, nn::Rng& rng) {
  config.validate();
  const auto resolved = resolve_labels(model, images, labels, config);
  Tensor start = images.clone();
  for (double& v : start.values()) v = std::clamp(v + rng.uniform(-config.epsilon, config.epsilon), 0.0, 1.0);
  return iterate(model, images, std::move(start), resolved, config, config.effective_step_size(), config.steps);
}

Tensor run_attack(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
                  const AttackConfig& config, nn::Rng& rng) {
  switch (config.method) {
    case AttackMethod::Fgsm: return fgsm(model, images, labels, config);
    case AttackMethod::Bim: return bim(model, images, labels, config);
    case AttackMethod::Pgd: return pgd(model, images, labels, config, rng);
  }
  throw std::invalid_argument("unknown attack method");
}

}  // namespace dfx::attacks
