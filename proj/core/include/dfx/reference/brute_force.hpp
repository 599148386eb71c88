#pragma once

#include <cstddef>
#include <optional>
#include <vector>

// Straight-loop reference implementations. They share no code with the
// library proper and exist to cross-check it (unit tests, acceptance suite,
// `dfx selftest`). Rows are plain nested vectors on purpose.
namespace dfx::reference {

using Rows = std::vector<std::vector<double>>;

double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// log of the double sum over i != j of exp(cosine(z_i, z_j)).
double intra_class_loss(const Rows& latent);

/// sum over rows and classes of p * log(max(p, 1e-12)).
double inter_class_loss(const Rows& probs);

/// sum over rows of (largest - second largest), by sorting each row.
double boundary_value(const Rows& probs);

struct Outcome {
  int clean = -1;
  int adversarial = -1;
  int truth = -1;
  std::optional<int> target;
};

/// Fraction fooled: adversarial != truth, or adversarial == target when targeted.
double attack_success_rate(const std::vector<Outcome>& outcomes, bool targeted);

std::vector<double> softmax(const std::vector<double>& logits);

/// Mean over rows of -log softmax(logits)[label].
double cross_entropy(const Rows& logits, const std::vector<int>& labels);

/// Mean over all entries of (softmax(logits) - target)^2.
double soft_label_mse(const Rows& logits, const Rows& targets);

/// Direct sliding-window convolution of one image [C][H][W] with kernels
/// [O][C][k][k]; returns [O][Ho][Wo] flattened row-major.
std::vector<double> conv2d(const std::vector<double>& image, std::size_t channels, std::size_t height,
                           std::size_t width, const std::vector<double>& kernels, std::size_t out_channels,
                           std::size_t kernel, std::size_t stride, std::size_t padding);

}  // namespace dfx::reference
