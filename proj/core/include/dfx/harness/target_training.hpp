#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>

#include "dfx/harness/config.hpp"
#include "dfx/harness/idx.hpp"
#include "dfx/models/target.hpp"

namespace dfx::harness {

struct TargetTrainingResult {
  models::TargetNet target;
  double test_accuracy = 0.0;
  std::size_t steps = 0;
};

/// Called after each epoch with (epoch, mean training loss).
using EpochObserver = std::function<void(std::size_t, double)>;

/// Trains the victim with Adam on shuffled minibatches of the training split.
TargetTrainingResult train_target(const DatasetStore& data, const models::TargetConfig& config,
                                  const TargetTrainingConfig& training, std::uint64_t seed,
                                  const EpochObserver& observer = {});

double classification_accuracy(const models::Classifier& model, const nn::Tensor& images, std::span<const int> labels);

/// Saves `<path>` and `<path>.json` holding the test accuracy.
void save_target(const TargetTrainingResult& result, const std::filesystem::path& path);
double read_target_accuracy(const std::filesystem::path& checkpoint);

}  // namespace dfx::harness
