#include "dfx/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "dfx/nn/random.hpp"

namespace dfx::metrics {

std::string to_string(Scenario scenario) {
  return scenario == Scenario::Untargeted ? "untargeted" : "targeted";
}

std::size_t EvalBatchResult::fooled(Scenario scenario) const {
  return static_cast<std::size_t>(std::count_if(examples.begin(), examples.end(), [&](const EvalExample& e) {
    if (scenario == Scenario::Untargeted) return e.adversarial_prediction != e.true_label;
    return e.target_label && e.adversarial_prediction == *e.target_label;
  }));
}

double attack_success_rate(const EvalBatchResult& results, Scenario scenario) {
  if (results.examples.empty()) throw std::invalid_argument("attack success rate of an empty result set");
  for (const EvalExample& e : results.examples) {
    if (scenario == Scenario::Untargeted && e.clean_prediction != e.true_label) {
      throw std::invalid_argument("untargeted results must only hold correctly classified examples");
    }
    if (scenario == Scenario::Targeted) {
      if (!e.target_label) throw std::invalid_argument("targeted results need a target label per example");
      if (e.clean_prediction == *e.target_label) {
        throw std::invalid_argument("targeted results must exclude examples already predicted as the target");
      }
    }
  }
  return static_cast<double>(results.fooled(scenario)) / static_cast<double>(results.size());
}

double boundary_value(const Tensor& probs) {
  if (probs.rank() != 2) throw nn::ShapeError("boundary_value expects [B, C], got " + nn::to_string(probs.shape()));
  const std::size_t b = probs.dim(0), c = probs.dim(1);
  if (c < 2) throw std::invalid_argument("boundary value needs at least two classes");
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    double top1 = -INFINITY, top2 = -INFINITY;
    for (std::size_t k = 0; k < c; ++k) {
      const double p = probs[i * c + k];
      if (p > top1) {
        top2 = top1;
        top1 = p;
      } else if (p > top2) {
        top2 = p;
      }
    }
    total += top1 - top2;
  }
  return total;
}

namespace {

double mean_pairwise_cosine(const Tensor& latents, std::span<const std::size_t> rows) {
  const std::size_t d = latents.dim(1);
  std::vector<double> unit(rows.size() * d, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double* z = &latents[rows[r] * d];
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += z[k] * z[k];
    const double norm = std::sqrt(sq);
    if (norm == 0.0) continue;
    for (std::size_t k = 0; k < d; ++k) unit[r * d + k] = z[k] / norm;
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += unit[i * d + k] * unit[j * d + k];
      total += std::clamp(dot, -1.0, 1.0);
      ++pairs;
    }
  }
  return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

}  // namespace

DiversityStats diversity_stats(std::span<const int> predictions, const Tensor& latents, std::size_t classes,
                               std::uint64_t seed) {
  if (latents.rank() != 2 || latents.dim(0) != predictions.size()) {
    throw nn::ShapeError("diversity_stats: " + std::to_string(predictions.size()) + " predictions vs latents " +
                         nn::to_string(latents.shape()));
  }
  if (classes == 0) throw std::invalid_argument("diversity_stats needs at least one class");
  DiversityStats stats;
  stats.histogram.assign(classes, 0);
  for (int p : predictions) {
    if (p < 0 || static_cast<std::size_t>(p) >= classes) throw std::out_of_range("prediction outside the class range");
    ++stats.histogram[static_cast<std::size_t>(p)];
  }
  const double n = static_cast<double>(predictions.size());
  stats.shares.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    stats.shares[c] = static_cast<double>(stats.histogram[c]) / n;
    if (stats.shares[c] > 0.0) stats.histogram_entropy -= stats.shares[c] * std::log(stats.shares[c]);
  }
  stats.min_share = *std::min_element(stats.shares.begin(), stats.shares.end());
  stats.max_share = *std::max_element(stats.shares.begin(), stats.shares.end());

  std::vector<std::size_t> rows;
  if (predictions.size() <= kExactSimilarityRows) {
    rows.resize(predictions.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  } else {
    nn::Rng rng(seed);
    rows = rng.permutation(predictions.size());
    rows.resize(kExactSimilarityRows);
    std::sort(rows.begin(), rows.end());
    stats.subsample_seed = seed;
  }
  stats.similarity_rows = rows.size();
  stats.mean_pairwise_similarity = mean_pairwise_cosine(latents, rows);
  return stats;
}

double agreement(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("agreement needs equally long prediction lists");
  if (a.empty()) throw std::invalid_argument("agreement of empty prediction lists");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

void export_embeddings(const Tensor& latents, std::span<const int> predictions, const std::filesystem::path& path) {
  if (latents.rank() != 2 || latents.dim(0) != predictions.size()) {
    throw nn::ShapeError("export_embeddings: latents " + nn::to_string(latents.shape()) + " vs " +
                         std::to_string(predictions.size()) + " predictions");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open embedding file for writing: " + path.string());
  const std::size_t d = latents.dim(1);
  for (std::size_t k = 0; k < d; ++k) out << "dim_" << k << ',';
  out << "predicted_class\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) out << fmt::format("{:.17g}", latents[i * d + k]) << ',';
    out << predictions[i] << '\n';
  }
  if (!out) throw std::runtime_error("failed writing embeddings to " + path.string());
}

}  // namespace dfx::metrics
