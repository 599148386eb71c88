#include "dfx/reference/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace dfx::reference {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return dot / std::sqrt(aa * bb);
}

double intra_class_loss(const Rows& latent) {
  double total = 0.0;
  for (std::size_t i = 0; i < latent.size(); ++i) {
    for (std::size_t j = 0; j < latent.size(); ++j) {
      if (i != j) total += std::exp(cosine(latent[i], latent[j]));
    }
  }
  return std::log(total);
}

double inter_class_loss(const Rows& probs) {
  double total = 0.0;
  for (const auto& row : probs) {
    for (double p : row) total += p * std::log(std::max(p, 1e-12));
  }
  return total;
}

double boundary_value(const Rows& probs) {
  double total = 0.0;
  for (auto row : probs) {
    std::sort(row.begin(), row.end(), std::greater<>());
    total += row[0] - row[1];
  }
  return total;
}

double attack_success_rate(const std::vector<Outcome>& outcomes, bool targeted) {
  std::size_t hits = 0;
  for (const auto& o : outcomes) {
    if (targeted ? (o.target && o.adversarial == *o.target) : (o.adversarial != o.truth)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) total += out[c] = std::exp(logits[c] - peak);
  for (double& v : out) v /= total;
  return out;
}

double cross_entropy(const Rows& logits, const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    total -= std::log(softmax(logits[i])[static_cast<std::size_t>(labels[i])]);
  }
  return total / static_cast<double>(logits.size());
}

double soft_label_mse(const Rows& logits, const Rows& targets) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto p = softmax(logits[i]);
    for (std::size_t c = 0; c < p.size(); ++c, ++count) total += (p[c] - targets[i][c]) * (p[c] - targets[i][c]);
  }
  return total / static_cast<double>(count);
}

std::vector<double> conv2d(const std::vector<double>& image, std::size_t channels, std::size_t height,
                           std::size_t width, const std::vector<double>& kernels, std::size_t out_channels,
                           std::size_t kernel, std::size_t stride, std::size_t padding) {
  const std::size_t oh = (height + 2 * padding - kernel) / stride + 1;
  const std::size_t ow = (width + 2 * padding - kernel) / stride + 1;
  std::vector<double> out(out_channels * oh * ow, 0.0);
  for (std::size_t o = 0; o < out_channels; ++o)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c)
          for (std::size_t ky = 0; ky < kernel; ++ky)
            for (std::size_t kx = 0; kx < kernel; ++kx) {
              const long iy = static_cast<long>(y * stride + ky) - static_cast<long>(padding);
              const long ix = static_cast<long>(x * stride + kx) - static_cast<long>(padding);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(height) || ix >= static_cast<long>(width)) continue;
              acc += image[(c * height + static_cast<std::size_t>(iy)) * width + static_cast<std::size_t>(ix)] *
                     kernels[((o * channels + c) * kernel + ky) * kernel + kx];
            }
        out[(o * oh + y) * ow + x] = acc;
      }
  return out;
}

}  // namespace dfx::reference
