#include "dfx/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfx::losses {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw nn::ShapeError("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Tensor intra_class_loss(Tape& tape, const Tensor& latent) {
  if (latent.rank() != 2) throw nn::ShapeError("intra_class_loss expects [B, D], got " + nn::to_string(latent.shape()));
  const std::size_t b = latent.dim(0), d = latent.dim(1);
  if (b < 2) throw std::invalid_argument("intra_class_loss needs at least two latent vectors");

  std::vector<double> norms(b, 0.0);
  std::vector<double> unit(latent.size(), 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += latent[i * d + k] * latent[i * d + k];
    norms[i] = std::sqrt(sq);
    if (norms[i] > 0.0) {
      for (std::size_t k = 0; k < d; ++k) unit[i * d + k] = latent[i * d + k] / norms[i];
    }
  }

  // exp(sim) for each unordered pair; each pair appears twice in the double sum.
  const std::size_t pairs = b * (b - 1) / 2;
  std::vector<double> terms;
  terms.reserve(pairs);
  std::vector<double> pair_exp(b * b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = i + 1; j < b; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += unit[i * d + k] * unit[j * d + k];
      const double e = std::exp(std::clamp(dot, -1.0, 1.0));
      pair_exp[i * b + j] = pair_exp[j * b + i] = e;
      terms.push_back(e);
    }
  }
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double e : terms) {
    total += e;
    total += e;
  }
  Tensor out = Tensor::scalar(std::log(total));
  nn::check_finite(out, "intra_class_loss");

  if (tape.wants({&latent})) {
    tape.record(out, {latent},
                [z = latent, out, b, d, total, norms = std::move(norms), unit = std::move(unit),
                 pair_exp = std::move(pair_exp)]() mutable {
                  if (!z.requires_grad()) return;
                  const double upstream = out.grad()[0];
                  auto gz = z.grad_buffer();
                  std::vector<double> du(d);
                  for (std::size_t i = 0; i < b; ++i) {
                    if (norms[i] == 0.0) continue;
                    std::fill(du.begin(), du.end(), 0.0);
                    for (std::size_t j = 0; j < b; ++j) {
                      if (j == i) continue;
                      // d/ds of log(S) through both (i, j) and (j, i) terms.
                      const double w = upstream * 2.0 * pair_exp[i * b + j] / total;
                      for (std::size_t k = 0; k < d; ++k) du[k] += w * unit[j * d + k];
                    }
                    double radial = 0.0;
                    for (std::size_t k = 0; k < d; ++k) radial += unit[i * d + k] * du[k];
                    for (std::size_t k = 0; k < d; ++k) {
                      gz[i * d + k] += (du[k] - unit[i * d + k] * radial) / norms[i];
                    }
                  }
                });
  }
  return out;
}

namespace {

void require_probability_rows(const Tensor& probs, const char* who) {
  if (probs.rank() != 2) throw nn::ShapeError(std::string(who) + " expects [B, C], got " + nn::to_string(probs.shape()));
  const std::size_t b = probs.dim(0), c = probs.dim(1);
  for (std::size_t i = 0; i < b; ++i) {
    double row = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      const double p = probs[i * c + k];
      if (!(p >= 0.0)) throw std::invalid_argument(std::string(who) + ": negative or NaN probability");
      row += p;
    }
    if (std::abs(row - 1.0) > 1e-6) {
      throw std::invalid_argument(std::string(who) + ": row " + std::to_string(i) + " sums to " + std::to_string(row));
    }
  }
}

}  // namespace

Tensor inter_class_loss(Tape& tape, const Tensor& probs) {
  require_probability_rows(probs, "inter_class_loss");
  return nn::sum(tape, nn::mul(tape, probs, nn::log(tape, probs)));
}

std::string to_string(InterMode mode) {
  return mode == InterMode::Entropy ? "entropy" : "random-target-ce";
}

InterMode parse_inter_mode(const std::string& name) {
  if (name == "entropy") return InterMode::Entropy;
  if (name == "random-target-ce") return InterMode::RandomTargetCe;
  throw std::invalid_argument("unknown inter mode '" + name + "' (expected entropy or random-target-ce)");
}

void GeneratorObjectiveConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be a nonnegative number");
}

GeneratorLoss generator_loss(Tape& tape, const Tensor& latent, const Tensor& probs,
                             const GeneratorObjectiveConfig& config, nn::Rng& rng) {
  config.validate();
  if (latent.rank() != 2 || probs.rank() != 2 || latent.dim(0) != probs.dim(0)) {
    throw nn::ShapeError("generator_loss: latent " + nn::to_string(latent.shape()) + " and probs " +
                         nn::to_string(probs.shape()) + " must come from the same batch");
  }
  GeneratorLoss loss;
  Tensor intra, inter;
  if (config.use_intra) {
    intra = intra_class_loss(tape, latent);
    loss.intra = intra.item();
  }
  if (config.use_inter) {
    if (config.inter_mode == InterMode::Entropy) {
      inter = inter_class_loss(tape, probs);
    } else {
      require_probability_rows(probs, "generator_loss");
      std::vector<int> wanted(probs.dim(0));
      for (int& y : wanted) y = static_cast<int>(rng.index(probs.dim(1)));
      const Tensor hits = nn::mul(tape, nn::log(tape, probs), nn::one_hot(wanted, probs.dim(1)));
      inter = nn::scale(tape, nn::sum(tape, hits), -1.0 / static_cast<double>(probs.dim(0)));
    }
    loss.inter = inter.item();
  }
  if (config.use_intra && config.use_inter) {
    loss.total = nn::add(tape, intra, nn::scale(tape, inter, config.alpha));
  } else if (config.use_intra) {
    loss.total = intra;
  } else if (config.use_inter) {
    loss.total = nn::scale(tape, inter, config.alpha);
  } else {
    loss.total = Tensor::scalar(0.0);
    loss.differentiable = false;
  }
  return loss;
}

void MixupConfig::validate() const {
  if (!(beta_param > 0.0) || !std::isfinite(beta_param)) throw std::invalid_argument("mixup beta must be positive");
}

Tensor mixup(const Tensor& a, const Tensor& b, std::span<const double> lambdas) {
  if (a.shape() != b.shape()) {
    throw nn::ShapeError("mixup shape mismatch " + nn::to_string(a.shape()) + " vs " + nn::to_string(b.shape()));
  }
  if (a.rank() == 0 || lambdas.size() != a.dim(0)) throw nn::ShapeError("mixup needs one lambda per example");
  const std::size_t row = a.size() / a.dim(0);
  Tensor out(a.shape());
  for (std::size_t r = 0; r < lambdas.size(); ++r) {
    const double lambda = lambdas[r];
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::domain_error("mixup lambda must lie in [0, 1]");
    for (std::size_t k = r * row; k < (r + 1) * row; ++k) {
      const double v = lambda * a[k] + (1.0 - lambda) * b[k];
      out[k] = std::clamp(v, std::min(a[k], b[k]), std::max(a[k], b[k]));
    }
  }
  return out;
}

Tensor mixup(const Tensor& a, const Tensor& b, double lambda) {
  if (a.rank() == 0) throw nn::ShapeError("mixup needs a batch");
  const std::vector<double> lambdas(a.dim(0), lambda);
  return mixup(a, b, lambdas);
}

Tensor mixup(const Tensor& a, const Tensor& b, const MixupConfig& config, nn::Rng& rng) {
  config.validate();
  if (a.rank() == 0) throw nn::ShapeError("mixup needs a batch");
  std::vector<double> lambdas(a.dim(0));
  for (double& l : lambdas) l = rng.beta(config.beta_param, config.beta_param);
  return mixup(a, b, lambdas);
}

MixupPair pair_for_mixup(const Tensor& batch, nn::Rng& rng) {
  if (batch.rank() == 0 || batch.dim(0) < 2) throw std::invalid_argument("pair_for_mixup needs at least two examples");
  const std::size_t n = batch.dim(0);
  std::vector<std::size_t> perm;
  // Rejection from uniform permutations; about e tries on average.
  for (;;) {
    perm = rng.permutation(n);
    bool fixed = false;
    for (std::size_t i = 0; i < n && !fixed; ++i) fixed = perm[i] == i;
    if (!fixed) break;
  }
  MixupPair pair{batch, nn::gather_rows(batch, perm), std::move(perm)};
  return pair;
}

Tensor train_loss(Tape& tape, const Tensor& logits, const oracle::OracleReply& reply, oracle::LabelMode mode) {
  if (reply.mode != mode) throw std::invalid_argument("train_loss: reply mode does not match the label mode");
  if (logits.shape() != reply.targets.shape()) {
    throw nn::ShapeError("train_loss: logits " + nn::to_string(logits.shape()) + " vs replies " +
                         nn::to_string(reply.targets.shape()));
  }
  if (mode == oracle::LabelMode::Hard) return nn::softmax_cross_entropy(tape, logits, reply.targets);
  const Tensor diff = nn::sub(tape, nn::softmax(tape, logits), reply.targets);
  return nn::mean(tape, nn::mul(tape, diff, diff));
}

}  // namespace dfx::losses
