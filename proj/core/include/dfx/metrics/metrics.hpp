#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfx/nn/tensor.hpp"

namespace dfx::metrics {

using nn::Tensor;

enum class Scenario { Untargeted, Targeted };

std::string to_string(Scenario scenario);

struct EvalExample {
  int clean_prediction = -1;
  int adversarial_prediction = -1;
  int true_label = -1;
  std::optional<int> target_label;
};

struct EvalBatchResult {
  std::vector<EvalExample> examples;

  std::size_t size() const { return examples.size(); }
  std::size_t fooled(Scenario scenario) const;
};

/// Untargeted: share of examples with f(x_adv) != y. Only examples the
/// target classified correctly may be included.
/// Targeted: share with f(x_adv) == y_t. Examples already predicted as y_t
/// may not be included.
double attack_success_rate(const EvalBatchResult& results, Scenario scenario);

/// sum over rows of (largest - second largest probability). Needs C >= 2.
double boundary_value(const Tensor& probs);

struct DiversityStats {
  std::vector<std::size_t> histogram;
  std::vector<double> shares;
  double min_share = 0.0;
  double max_share = 0.0;
  /// Entropy (nats) of the class shares.
  double histogram_entropy = 0.0;
  double mean_pairwise_similarity = 0.0;
  /// Rows used for the similarity mean; fewer than the batch when subsampled.
  std::size_t similarity_rows = 0;
  std::uint64_t subsample_seed = 0;
};

/// Rows above this count are subsampled (seeded) for the pairwise mean.
inline constexpr std::size_t kExactSimilarityRows = 2048;

DiversityStats diversity_stats(std::span<const int> predictions, const Tensor& latents, std::size_t classes,
                               std::uint64_t seed = 0);

/// Share of positions where the two prediction lists agree.
double agreement(std::span<const int> a, std::span<const int> b);

/// CSV: header `dim_0,...,dim_{D-1},predicted_class`, then one row per example.
void export_embeddings(const Tensor& latents, std::span<const int> predictions, const std::filesystem::path& path);

}  // namespace dfx::metrics
