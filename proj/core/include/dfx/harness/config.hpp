#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dfx/attacks/attacks.hpp"
#include "dfx/losses/losses.hpp"
#include "dfx/models/generator.hpp"
#include "dfx/models/substitute.hpp"
#include "dfx/models/target.hpp"
#include "dfx/nn/optim.hpp"
#include "dfx/oracle/oracle.hpp"

namespace dfx::harness {

struct DatasetSpec {
  std::string name = "mnist";
  std::filesystem::path directory = "data/mnist";
  models::ImageGeometry geometry{};
  std::size_t classes = 10;
};

/// Victim training; only used by `train-target` and never seen by the attacker.
struct TargetTrainingConfig {
  std::size_t epochs = 2;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
};

struct ExperimentConfig {
  DatasetSpec dataset{};
  std::filesystem::path target_checkpoint = "target.ckpt";
  TargetTrainingConfig target_training{};

  oracle::LabelMode label_mode = oracle::LabelMode::Soft;
  std::size_t query_budget = 20000;
  std::size_t batch_size = 256;

  std::size_t noise_dim = 100;
  nn::OptimizerConfig generator_optimizer{nn::OptimizerKind::Adam, 1e-3};
  nn::OptimizerConfig substitute_optimizer{nn::OptimizerKind::Adam, 1e-2};
  /// Optimizer steps on each queried batch.
  std::size_t substitute_steps = 1;
  /// Steps after the first draw their batch from every reply bought so far.
  bool replay_queries = false;

  losses::GeneratorObjectiveConfig objective{};
  losses::MixupConfig mixup{};
  bool use_mixup = true;
  /// Queries uniform noise images instead of generator output and skips the
  /// generator step entirely.
  bool random_noise_queries = false;

  std::vector<attacks::AttackMethod> attacks{attacks::AttackMethod::Pgd};
  double epsilon = 32.0 / 255.0;
  std::size_t attack_steps = 10;
  double attack_step_size = 0.0;
  bool targeted = false;

  std::size_t eval_examples = 1000;
  std::size_t diversity_examples = 10000;
  std::size_t probe_size = 1024;
  bool export_embeddings = false;

  std::uint64_t seed = 0;
  std::filesystem::path output_dir;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;

  models::GeneratorConfig generator_config() const;
  models::SubstituteConfig substitute_config() const;
  models::TargetConfig target_config() const;
  attacks::AttackConfig attack_config(attacks::AttackMethod method, bool targeted_scenario) const;
};

/// Flat `key = value` lines, one per setting, using the CLI flag names.
std::string to_ini(const ExperimentConfig& config);

std::string join_attacks(const std::vector<attacks::AttackMethod>& methods);
/// Comma-separated attack names, e.g. "fgsm,pgd".
std::vector<attacks::AttackMethod> parse_attack_list(const std::string& text);

}  // namespace dfx::harness
