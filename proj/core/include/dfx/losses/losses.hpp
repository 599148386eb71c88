#pragma once

#include <span>
#include <string>
#include <vector>

#include "dfx/nn/ops.hpp"
#include "dfx/nn/random.hpp"
#include "dfx/oracle/oracle.hpp"

// Generator and substitute objectives for data-free extraction.
namespace dfx::losses {

using nn::Tape;
using nn::Tensor;

/// Cosine similarity; defined as 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Self-contrastive spread of a latent batch z [B, D], B >= 2:
///
///   log sum_{i != j} exp(cos(z_i, z_j))
///
/// Minimising it pushes latent codes apart. The pair terms are summed in
/// sorted order, so the value does not depend on the row order of z.
Tensor intra_class_loss(Tape& tape, const Tensor& latent);

/// sum_i sum_c p_ic * log p_ic over probability rows [B, C] (log floored at
/// 1e-12, so one-hot rows give 0). Minimising it flattens each row.
Tensor inter_class_loss(Tape& tape, const Tensor& probs);

enum class Similarity { Cosine };
enum class InterMode {
  Entropy,          ///< inter_class_loss as written above
  RandomTargetCe,   ///< cross-entropy towards freshly drawn uniform class labels
};

std::string to_string(InterMode mode);
InterMode parse_inter_mode(const std::string& name);

struct GeneratorObjectiveConfig {
  double alpha = 1.0;
  Similarity similarity = Similarity::Cosine;
  InterMode inter_mode = InterMode::Entropy;
  bool use_intra = true;
  bool use_inter = true;

  void validate() const;
};

struct GeneratorLoss {
  Tensor total;
  double intra = 0.0;
  double inter = 0.0;
  /// False when both terms are disabled; `total` is then a constant 0.
  bool differentiable = true;
};

/// L_G = L_intra + alpha * L_inter for one generated batch. `rng` is only
/// drawn from in RandomTargetCe mode.
GeneratorLoss generator_loss(Tape& tape, const Tensor& latent, const Tensor& probs,
                             const GeneratorObjectiveConfig& config, nn::Rng& rng);

struct MixupConfig {
  /// lambda ~ Beta(beta_param, beta_param)
  double beta_param = 1.0;

  void validate() const;
};

/// lambda * a + (1 - lambda) * b elementwise, kept inside [min(a,b), max(a,b)].
Tensor mixup(const Tensor& a, const Tensor& b, double lambda);
/// Per-example weights: row k mixes with lambdas[k].
Tensor mixup(const Tensor& a, const Tensor& b, std::span<const double> lambdas);
/// Draws one lambda per example from Beta(beta_param, beta_param).
Tensor mixup(const Tensor& a, const Tensor& b, const MixupConfig& config, nn::Rng& rng);

struct MixupPair {
  Tensor first;
  Tensor second;
  /// second row k is input row partner[k]; partner has no fixed points.
  std::vector<std::size_t> partner;
};

/// Pairs every example with another one drawn as a uniform random derangement.
MixupPair pair_for_mixup(const Tensor& batch, nn::Rng& rng);

/// Substitute imitation loss on the queried batch:
///   Hard: mean cross-entropy of softmax(logits) against the one-hot replies
///   Soft: mean squared error between softmax(logits) and the reply rows,
///         averaged over all B * C entries
Tensor train_loss(Tape& tape, const Tensor& logits, const oracle::OracleReply& reply, oracle::LabelMode mode);

}  // namespace dfx::losses
