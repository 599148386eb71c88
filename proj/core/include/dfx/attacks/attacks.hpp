#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfx/models/layers.hpp"
#include "dfx/nn/random.hpp"

// L-infinity transfer attacks crafted on a white-box classifier.
namespace dfx::attacks {

using nn::Tensor;

enum class AttackMethod { Fgsm, Bim, Pgd };

std::string to_string(AttackMethod method);
AttackMethod parse_attack_method(const std::string& name);

struct AttackConfig {
  AttackMethod method = AttackMethod::Pgd;
  double epsilon = 32.0 / 255.0;
  std::size_t steps = 10;
  /// Per-step size for BIM/PGD; 0 selects epsilon / 4.
  double step_size = 0.0;
  bool targeted = false;
  /// Single class every example is pushed towards; when unset the label
  /// argument of the attack functions carries per-example targets.
  std::optional<int> target_class;

  double effective_step_size() const { return step_size > 0.0 ? step_size : epsilon / 4.0; }
  /// Throws on invalid settings; returns a warning for legal but odd ones.
  std::optional<std::string> validate() const;
};

/// The labels argument below is the true (or reference) class for
/// untargeted attacks and the desired class for targeted ones.
///
/// x' = clip_ball(clip_[0,1](x +/- eps * sign(grad_x CE(f(x), label))))
Tensor fgsm(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
            const AttackConfig& config);

/// Iterated FGSM from x0 = x with steps of step_size, projected onto
/// [0, 1] and then onto the eps-ball around x after every step.
Tensor bim(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
           const AttackConfig& config);

/// BIM from a uniform random start x0 = clip_[0,1](x + U(-eps, eps)).
Tensor pgd(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
           const AttackConfig& config, nn::Rng& rng);

/// Dispatches on config.method; `rng` is used by PGD only.
Tensor run_attack(const models::Classifier& model, const Tensor& images, std::span<const int> labels,
                  const AttackConfig& config, nn::Rng& rng);

/// Gradient of the mean cross-entropy w.r.t. the input images.
Tensor input_gradient(const models::Classifier& model, const Tensor& images, std::span<const int> labels);

}  // namespace dfx::attacks
