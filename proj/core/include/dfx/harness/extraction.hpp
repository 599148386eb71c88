#pragma once

#include <functional>
#include <span>

#include "dfx/harness/config.hpp"
#include "dfx/harness/report.hpp"
#include "dfx/models/generator.hpp"
#include "dfx/models/substitute.hpp"
#include "dfx/oracle/oracle.hpp"

namespace dfx::harness {

/// Images seen during one round: the regenerated batch X and the batch
/// actually sent to the oracle (X mixed with a shuffled copy of itself
/// unless mixup is off).
struct RoundBatches {
  std::size_t round;
  const nn::Tensor& generated;
  const nn::Tensor& queried;
};

using RoundObserver = std::function<void(const RoundRecord&, const RoundBatches&)>;

/// Held-out images for agreement tracking, labelled once via evaluation_query.
struct ProbeSet {
  nn::Tensor images;
  std::vector<int> target_labels;
};

ProbeSet make_probe(oracle::Oracle& oracle, const nn::Tensor& images, oracle::LabelMode mode);

struct ExtractionResult {
  models::SubstituteNet substitute;
  models::GeneratorNet generator;
  ExtractionReport report;
};

/// The networks extract() starts from for this config's seed.
models::GeneratorNet initial_generator(const ExperimentConfig& config);
models::SubstituteNet initial_substitute(const ExperimentConfig& config);

/// Runs generator/substitute rounds until the oracle budget cannot fund
/// another batch. Per round:
///   1. noise -> G -> X; one generator step on L_G through the substitute (no queries)
///   2. fresh noise -> X; mixup with a deranged copy -> X_hat
///   3. query X_hat; one substitute step on L_train
ExtractionResult extract(const ExperimentConfig& config, oracle::Oracle& oracle, const ProbeSet& probe,
                         const RoundObserver& observer = {});

}  // namespace dfx::harness
