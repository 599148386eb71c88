#include "dfx/harness/evaluation.hpp"

#include <chrono>
#include <numeric>

#include "dfx/metrics/metrics.hpp"

namespace dfx::harness {

namespace {

enum Stream : std::uint64_t { kTargets = 16, kDiversityNoise, kDiversityMixup, kDiversitySubsample, kAttackBase = 64 };

constexpr std::size_t kAttackChunk = 100;
constexpr std::size_t kFilterChunk = 500;

std::vector<std::size_t> iota_rows(std::size_t start, std::size_t end) {
  std::vector<std::size_t> rows(end - start);
  std::iota(rows.begin(), rows.end(), start);
  return rows;
}

}  // namespace

EligibleSet filter_correct(oracle::Oracle& oracle, const nn::Tensor& images, std::span<const int> labels,
                           std::size_t count, oracle::LabelMode mode) {
  if (images.rank() == 0 || images.dim(0) != labels.size()) {
    throw nn::ShapeError("filter_correct needs one label per image");
  }
  std::vector<std::size_t> keep;
  for (std::size_t start = 0; start < labels.size() && keep.size() < count; start += kFilterChunk) {
    const auto rows = iota_rows(start, std::min(labels.size(), start + kFilterChunk));
    const auto reply = oracle.evaluation_query(nn::gather_rows(images, rows), mode);
    for (std::size_t i = 0; i < rows.size() && keep.size() < count; ++i) {
      if (reply.labels[i] == labels[rows[i]]) keep.push_back(rows[i]);
    }
  }
  if (keep.empty()) throw std::runtime_error("no test image is classified correctly by the target");
  EligibleSet out{nn::gather_rows(images, keep), {}};
  for (std::size_t r : keep) out.labels.push_back(labels[r]);
  return out;
}

std::vector<AttackCell> evaluate_attacks(const models::Classifier& surrogate, oracle::Oracle& oracle,
                                         const EligibleSet& eligible, const ExperimentConfig& config) {
  const nn::Rng root(config.seed);
  const std::size_t n = eligible.labels.size();
  const std::size_t classes = surrogate.classes();

  std::vector<int> wanted(n);
  nn::Rng target_rng = root.split(kTargets);
  for (std::size_t i = 0; i < n; ++i) {
    const int offset = 1 + static_cast<int>(target_rng.index(classes - 1));
    wanted[i] = (eligible.labels[i] + offset) % static_cast<int>(classes);
  }

  std::vector<AttackCell> cells;
  std::vector<bool> scenarios{false};
  if (config.targeted) scenarios.push_back(true);
  std::uint64_t stream = kAttackBase;
  for (attacks::AttackMethod method : config.attacks) {
    for (bool targeted : scenarios) {
      const attacks::AttackConfig attack = config.attack_config(method, targeted);
      const std::span<const int> aim = targeted ? std::span<const int>(wanted) : std::span<const int>(eligible.labels);
      nn::Rng rng = root.split(stream++);
      metrics::EvalBatchResult results;
      for (std::size_t start = 0; start < n; start += kAttackChunk) {
        const std::size_t end = std::min(n, start + kAttackChunk);
        const nn::Tensor clean = eligible.images.slice_rows(start, end);
        const nn::Tensor adversarial = attacks::run_attack(surrogate, clean, aim.subspan(start, end - start), attack, rng);
        const auto reply = oracle.evaluation_query(adversarial, config.label_mode);
        for (std::size_t i = start; i < end; ++i) {
          metrics::EvalExample e;
          e.clean_prediction = eligible.labels[i];
          e.adversarial_prediction = reply.labels[i - start];
          e.true_label = eligible.labels[i];
          if (targeted) e.target_label = wanted[i];
          results.examples.push_back(e);
        }
      }
      const auto scenario = targeted ? metrics::Scenario::Targeted : metrics::Scenario::Untargeted;
      cells.push_back({attacks::to_string(method), metrics::to_string(scenario), oracle::to_string(config.label_mode),
                       metrics::attack_success_rate(results, scenario), results.size(), results.fooled(scenario)});
    }
  }
  return cells;
}

DiversityReport evaluate_diversity(const models::GeneratorNet& generator, const models::SubstituteNet& substitute,
                                   oracle::Oracle& oracle, const ExperimentConfig& config) {
  const nn::Rng root(config.seed);
  nn::Rng noise_rng = root.split(kDiversityNoise);
  nn::Rng mixup_rng = root.split(kDiversityMixup);
  const std::size_t n = config.diversity_examples;
  const std::size_t b = config.batch_size;

  DiversityReport out;
  out.examples = n;
  out.generator_checksum = generator.parameter_checksum();
  out.substitute_checksum = substitute.parameter_checksum();
  std::vector<int> predicted;
  std::vector<nn::Tensor> latents;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = std::min(n, start + b);
    if (n - end == 1) end = n;
    const std::size_t rows = end - start;
    nn::Tape tape = nn::Tape::inference();
    const nn::Tensor x = config.random_noise_queries
                             ? nn::sample_uniform(noise_rng, config.dataset.geometry.batch_shape(rows))
                             : generator.generate(tape, nn::sample_normal(noise_rng, {rows, generator.noise_dim()}));
    const losses::MixupPair pair = losses::pair_for_mixup(x, mixup_rng);
    const nn::Tensor mixed = losses::mixup(pair.first, pair.second, config.mixup, mixup_rng);

    const auto plain = oracle.evaluation_query(x, oracle::LabelMode::Soft);
    out.bv_plain += metrics::boundary_value(plain.targets);
    out.bv_mixup += metrics::boundary_value(oracle.evaluation_query(mixed, oracle::LabelMode::Soft).targets);
    predicted.insert(predicted.end(), plain.labels.begin(), plain.labels.end());
    latents.push_back(substitute.encode(tape, x));
    start = end;
  }
  const nn::Tensor z = nn::concat_rows(latents);
  out.stats = metrics::diversity_stats(predicted, z, oracle.classes(), root.split(kDiversitySubsample).next_u64());
  if (config.export_embeddings && !config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    metrics::export_embeddings(z, predicted, config.output_dir / "embeddings.csv");
  }
  return out;
}

void attack_and_evaluate(ExtractionResult& result, oracle::Oracle& oracle, const nn::Tensor& test_images,
                         std::span<const int> test_labels, const ExperimentConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const EligibleSet eligible = filter_correct(oracle, test_images, test_labels, config.eval_examples, config.label_mode);
  result.report.attacks = evaluate_attacks(result.substitute, oracle, eligible, config);
  result.report.diversity = evaluate_diversity(result.generator, result.substitute, oracle, config);
  result.report.evaluation_queries = oracle.evaluation_queries();
  result.report.evaluation_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

}  // namespace dfx::harness
