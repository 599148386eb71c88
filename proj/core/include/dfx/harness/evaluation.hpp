#pragma once

#include <span>

#include "dfx/harness/config.hpp"
#include "dfx/harness/extraction.hpp"
#include "dfx/harness/report.hpp"

namespace dfx::harness {

/// Correctly classified test images, in test-set order.
struct EligibleSet {
  nn::Tensor images;
  std::vector<int> labels;
};

/// Walks `images` in order and keeps the first `count` the target labels
/// correctly (checked through evaluation queries). Throws when none qualify.
EligibleSet filter_correct(oracle::Oracle& oracle, const nn::Tensor& images, std::span<const int> labels,
                           std::size_t count, oracle::LabelMode mode);

/// Crafts every configured attack on `surrogate` and measures success on the
/// target through evaluation queries: one cell per (attack, scenario).
std::vector<AttackCell> evaluate_attacks(const models::Classifier& surrogate, oracle::Oracle& oracle,
                                         const EligibleSet& eligible, const ExperimentConfig& config);

/// Boundary values and class coverage of `config.diversity_examples` fresh
/// generator outputs, with and without mixup, plus substitute-latent spread.
DiversityReport evaluate_diversity(const models::GeneratorNet& generator, const models::SubstituteNet& substitute,
                                   oracle::Oracle& oracle, const ExperimentConfig& config);

/// Fills the final section of `result.report`. `test_images` must exclude
/// the probe images used during extraction.
void attack_and_evaluate(ExtractionResult& result, oracle::Oracle& oracle, const nn::Tensor& test_images,
                         std::span<const int> test_labels, const ExperimentConfig& config);

}  // namespace dfx::harness
