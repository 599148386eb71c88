#include "dfx/harness/extraction.hpp"

#include <algorithm>
#include <chrono>

#include "dfx/metrics/metrics.hpp"

namespace dfx::harness {

namespace {

enum Stream : std::uint64_t { kGeneratorInit = 1, kSubstituteInit, kNoise, kMixup, kObjective, kReplay };

void set_trainable(const std::vector<nn::Tensor>& params, bool trainable) {
  for (nn::Tensor p : params) p.set_requires_grad(trainable);
}

double probe_agreement(const models::SubstituteNet& substitute, const ProbeSet& probe) {
  const auto predicted = nn::argmax_rows(models::predict_logits(substitute, probe.images));
  return metrics::agreement(predicted, probe.target_labels);
}

/// Every (query, reply) pair bought so far, stored row-major.
class ReplayPool {
 public:
  void add(const nn::Tensor& images, const oracle::OracleReply& reply) {
    if (rows_ == 0) {
      image_shape_ = images.shape();
      classes_ = reply.targets.dim(1);
    }
    images_.insert(images_.end(), images.values().begin(), images.values().end());
    targets_.insert(targets_.end(), reply.targets.values().begin(), reply.targets.values().end());
    labels_.insert(labels_.end(), reply.labels.begin(), reply.labels.end());
    rows_ += images.dim(0);
  }

  /// `count` distinct rows drawn uniformly.
  std::pair<nn::Tensor, oracle::OracleReply> sample(std::size_t count, oracle::LabelMode mode, nn::Rng& rng) const {
    std::vector<std::size_t> rows = rng.permutation(rows_);
    rows.resize(std::min(count, rows_));
    nn::Shape shape = image_shape_;
    shape[0] = rows.size();
    const std::size_t pixels = images_.size() / rows_;
    nn::Tensor images(shape);
    oracle::OracleReply reply;
    reply.mode = mode;
    reply.targets = nn::Tensor({rows.size(), classes_});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t r = rows[i];
      std::copy_n(images_.begin() + static_cast<std::ptrdiff_t>(r * pixels), pixels,
                  images.values().begin() + static_cast<std::ptrdiff_t>(i * pixels));
      std::copy_n(targets_.begin() + static_cast<std::ptrdiff_t>(r * classes_), classes_,
                  reply.targets.values().begin() + static_cast<std::ptrdiff_t>(i * classes_));
      reply.labels.push_back(labels_[r]);
    }
    return {images, reply};
  }

 private:
  nn::Shape image_shape_;
  std::size_t classes_ = 0;
  std::size_t rows_ = 0;
  std::vector<double> images_;
  std::vector<double> targets_;
  std::vector<int> labels_;
};

}  // namespace

ProbeSet make_probe(oracle::Oracle& oracle, const nn::Tensor& images, oracle::LabelMode mode) {
  ProbeSet probe{images, oracle.evaluation_query(images, mode).labels};
  return probe;
}

models::GeneratorNet initial_generator(const ExperimentConfig& config) {
  nn::Rng rng = nn::Rng(config.seed).split(kGeneratorInit);
  return models::GeneratorNet(config.generator_config(), rng);
}

models::SubstituteNet initial_substitute(const ExperimentConfig& config) {
  nn::Rng rng = nn::Rng(config.seed).split(kSubstituteInit);
  return models::SubstituteNet(config.substitute_config(), rng);
}

ExtractionResult extract(const ExperimentConfig& config, oracle::Oracle& oracle, const ProbeSet& probe,
                         const RoundObserver& observer) {
  config.validate();
  if (oracle.geometry() != config.dataset.geometry || oracle.classes() != config.dataset.classes) {
    throw std::invalid_argument("oracle geometry or class count does not match the experiment config");
  }
  const auto started = std::chrono::steady_clock::now();
  const nn::Rng root(config.seed);
  nn::Rng noise_rng = root.split(kNoise);
  nn::Rng mixup_rng = root.split(kMixup);
  nn::Rng objective_rng = root.split(kObjective);
  nn::Rng replay_rng = root.split(kReplay);
  ReplayPool pool;

  ExtractionResult result{initial_substitute(config), initial_generator(config), {}};
  models::SubstituteNet& sub = result.substitute;
  models::GeneratorNet& gen = result.generator;
  ExtractionReport& report = result.report;
  report.config_ini = to_ini(config);
  report.budget_limit = oracle.budget().limit;

  const auto sub_params = sub.parameters();
  nn::Optimizer gen_opt(gen.parameters(), config.generator_optimizer);
  nn::Optimizer sub_opt(sub_params, config.substitute_optimizer);
  const std::size_t b = config.batch_size;
  const auto& geometry = config.dataset.geometry;

  report.initial_agreement = probe_agreement(sub, probe);

  auto draw_batch = [&](nn::Tape& tape) {
    if (config.random_noise_queries) return nn::sample_uniform(noise_rng, geometry.batch_shape(b));
    return gen.generate(tape, nn::sample_normal(noise_rng, {b, gen.noise_dim()}));
  };

  for (std::size_t round = 1; oracle.budget().remaining() >= b; ++round) {
    RoundRecord record;
    record.round = round;

    if (!config.random_noise_queries) {
      nn::Tape tape;
      set_trainable(sub_params, false);
      const nn::Tensor x = draw_batch(tape);
      const nn::Tensor z = sub.encode(tape, x);
      const nn::Tensor probs = nn::softmax(tape, sub.head(tape, z));
      const losses::GeneratorLoss lg = losses::generator_loss(tape, z, probs, config.objective, objective_rng);
      if (lg.differentiable) {
        tape.backward(lg.total);
        gen_opt.step();
      }
      gen_opt.zero_grad();
      set_trainable(sub_params, true);
      record.l_g = lg.total.item();
      record.l_intra = lg.intra;
      record.l_inter = lg.inter;
    }

    nn::Tape inference = nn::Tape::inference();
    const nn::Tensor generated = draw_batch(inference);
    nn::Tensor queried = generated;
    if (config.use_mixup) {
      const losses::MixupPair pair = losses::pair_for_mixup(generated, mixup_rng);
      queried = losses::mixup(pair.first, pair.second, config.mixup, mixup_rng);
    }

    oracle::OracleReply reply;
    try {
      reply = oracle.query(queried, config.label_mode);
    } catch (const oracle::BudgetExhausted&) {
      break;
    }
    if (config.replay_queries) pool.add(queried, reply);
    for (std::size_t step = 0; step < config.substitute_steps; ++step) {
      nn::Tape tape;
      nn::Tensor loss;
      if (step > 0 && config.replay_queries) {
        const auto [images, replayed] = pool.sample(b, config.label_mode, replay_rng);
        loss = losses::train_loss(tape, sub.logits(tape, images), replayed, config.label_mode);
      } else {
        loss = losses::train_loss(tape, sub.logits(tape, queried), reply, config.label_mode);
      }
      tape.backward(loss);
      sub_opt.step();
      sub_opt.zero_grad();
      if (step == 0) record.l_train = loss.item();
    }

    const nn::Tensor probs = config.label_mode == oracle::LabelMode::Soft
                                 ? reply.targets
                                 : oracle.evaluation_query(queried, oracle::LabelMode::Soft).targets;
    record.bv = metrics::boundary_value(probs);
    record.queries_used = oracle.budget().used;
    record.agreement = probe_agreement(sub, probe);
    report.rounds.push_back(record);
    if (observer) observer(record, RoundBatches{round, generated, queried});
  }

  report.budget_used = oracle.budget().used;
  report.evaluation_queries = oracle.evaluation_queries();
  report.extraction_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace dfx::harness
