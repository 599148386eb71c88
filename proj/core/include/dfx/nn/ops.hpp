#pragma once

#include "dfx/nn/tape.hpp"
#include "dfx/nn/tensor.hpp"

// Differentiable operators. Every op validates shapes, rejects non-finite
// results, and records itself on the tape when any input requires grad.
namespace dfx::nn {

/// Floor applied inside log() so that 0 * log(0) evaluates to 0.
inline constexpr double kLogFloor = 1e-12;

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double factor);

/// [M, K] x [K, N] -> [M, N]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
/// x[B, in] * weight[out, in]^T + bias[out]
Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias);

struct Conv2dOptions {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

/// NCHW convolution with a square kernel (side <= 5), stride 1 or 2 and zero padding.
Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, Conv2dOptions opts = {});
Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias,
              Conv2dOptions opts = {});

/// Non-overlapping max pooling (stride == window); trailing rows/cols are dropped.
Tensor max_pool2d(Tape& tape, const Tensor& x, std::size_t window = 2);
Tensor upsample_nearest(Tape& tape, const Tensor& x, std::size_t factor = 2);

/// Normalises with batch statistics, per channel over N*H*W for [N, C, H, W]
/// or per feature over N for [N, D], then applies gamma * xhat + beta.
Tensor batch_norm(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

Tensor relu(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor exp(Tape& tape, const Tensor& x);
/// log(max(x, floor)); the gradient is zero below the floor.
Tensor log(Tape& tape, const Tensor& x, double floor = kLogFloor);
/// Elementwise clamp; gradient flows only where lo < x < hi.
Tensor clamp(Tape& tape, const Tensor& x, double lo, double hi);

Tensor reshape(Tape& tape, const Tensor& x, Shape shape);
/// [N, ...] -> [N, rest]
Tensor flatten(Tape& tape, const Tensor& x);

/// Row-wise softmax of a [B, C] tensor.
Tensor softmax(Tape& tape, const Tensor& x);
Tensor log_softmax(Tape& tape, const Tensor& x);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);

/// Scales each row of [B, D] to unit L2 norm; all-zero rows map to zero.
Tensor normalize_rows(Tape& tape, const Tensor& x);

/// Mean over rows of -sum_c targets[i, c] * log_softmax(logits)[i, c].
/// Targets are constants (one-hot or probability rows).
Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, const Tensor& targets);

/// One-hot rows [labels.size(), classes].
Tensor one_hot(std::span<const int> labels, std::size_t classes);

}  // namespace dfx::nn
