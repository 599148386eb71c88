#include <algorithm>
#include <cmath>

#include "dfx/nn/ops.hpp"

namespace dfx::nn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     to_string(t.shape()));
  }
}

// y = f(x); dy/dx = df(x, y).
template <class F, class DF>
Tensor unary(Tape& tape, const Tensor& x, const char* name, F f, DF df) {
  Tensor out(x.shape());
  auto xv = x.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < xv.size(); ++i) ov[i] = f(xv[i]);
  check_finite(out, name);
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out, df]() mutable {
      if (!x.requires_grad()) return;
      auto gx = x.grad_buffer();
      auto go = out.grad();
      auto xv = x.values();
      auto ov = out.values();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * df(xv[i], ov[i]);
    });
  }
  return out;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  check_finite(out, "add");
  if (tape.wants({&a, &b})) {
    tape.record(out, {a, b}, [a = a, b = b, out]() mutable {
      auto go = out.grad();
      if (a.requires_grad()) {
        auto g = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i];
      }
      if (b.requires_grad()) {
        auto g = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i];
      }
    });
  }
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  check_finite(out, "sub");
  if (tape.wants({&a, &b})) {
    tape.record(out, {a, b}, [a = a, b = b, out]() mutable {
      auto go = out.grad();
      if (a.requires_grad()) {
        auto g = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i];
      }
      if (b.requires_grad()) {
        auto g = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= go[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  check_finite(out, "mul");
  if (tape.wants({&a, &b})) {
    tape.record(out, {a, b}, [a = a, b = b, out]() mutable {
      auto go = out.grad();
      if (a.requires_grad()) {
        auto g = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i] * b[i];
      }
      if (b.requires_grad()) {
        auto g = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += go[i] * a[i];
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  return unary(
      tape, a, "scale", [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor relu(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "tanh", [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "sigmoid",
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor exp(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(Tape& tape, const Tensor& x, double floor) {
  return unary(
      tape, x, "log", [floor](double v) { return std::log(std::max(v, floor)); },
      [floor](double v, double) { return v > floor ? 1.0 / v : 0.0; });
}

Tensor clamp(Tape& tape, const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo must not exceed hi");
  return unary(
      tape, x, "clamp", [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  Tensor out = x.reshaped(std::move(shape));
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out]() mutable {
      if (!x.requires_grad()) return;
      auto gx = x.grad_buffer();
      auto go = out.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i];
    });
  }
  return out;
}

Tensor flatten(Tape& tape, const Tensor& x) {
  if (x.rank() < 1) throw ShapeError("flatten needs a batch axis");
  return reshape(tape, x, {x.dim(0), x.size() / x.dim(0)});
}

Tensor softmax(Tape& tape, const Tensor& x) {
  require_rank(x, 2, "softmax");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = &x[r * cols];
    double* o = &out[r * cols];
    const double peak = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += (o[c] = std::exp(in[c] - peak));
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  check_finite(out, "softmax");
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out, rows, cols]() mutable {
      if (!x.requires_grad()) return;
      auto gx = x.grad_buffer();
      auto go = out.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * cols;
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += go[base + c] * out[base + c];
        for (std::size_t c = 0; c < cols; ++c) gx[base + c] += out[base + c] * (go[base + c] - dot);
      }
    });
  }
  return out;
}

Tensor log_softmax(Tape& tape, const Tensor& x) {
  require_rank(x, 2, "log_softmax");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = &x[r * cols];
    const double peak = *std::max_element(in, in + cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(in[c] - peak);
    const double lse = peak + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = in[c] - lse;
  }
  check_finite(out, "log_softmax");
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out, rows, cols]() mutable {
      if (!x.requires_grad()) return;
      auto gx = x.grad_buffer();
      auto go = out.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * cols;
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += go[base + c];
        for (std::size_t c = 0; c < cols; ++c) {
          gx[base + c] += go[base + c] - std::exp(out[base + c]) * total;
        }
      }
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  Tensor out = Tensor::scalar(total);
  check_finite(out, "sum");
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out]() mutable {
      if (!x.requires_grad()) return;
      const double g = out.grad()[0];
      for (double& v : x.grad_buffer()) v += g;
    });
  }
  return out;
}

Tensor mean(Tape& tape, const Tensor& x) {
  return scale(tape, sum(tape, x), 1.0 / static_cast<double>(x.size()));
}

Tensor normalize_rows(Tape& tape, const Tensor& x) {
  require_rank(x, 2, "normalize_rows");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor out(x.shape());
  std::vector<double> norms(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < cols; ++c) sq += x[r * cols + c] * x[r * cols + c];
    norms[r] = std::sqrt(sq);
    if (norms[r] > 0.0) {
      for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x[r * cols + c] / norms[r];
    }
  }
  check_finite(out, "normalize_rows");
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out, rows, cols, norms]() mutable {
      if (!x.requires_grad()) return;
      auto gx = x.grad_buffer();
      auto go = out.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        if (norms[r] == 0.0) continue;
        const std::size_t base = r * cols;
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += out[base + c] * go[base + c];
        for (std::size_t c = 0; c < cols; ++c) {
          gx[base + c] += (go[base + c] - out[base + c] * dot) / norms[r];
        }
      }
    });
  }
  return out;
}

Tensor softmax_cross_entropy(Tape& tape, const Tensor& logits, const Tensor& targets) {
  require_rank(logits, 2, "softmax_cross_entropy");
  require_same_shape(logits, targets, "softmax_cross_entropy");
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  Tape local = Tape::inference();
  Tensor logp = log_softmax(local, logits);
  double total = 0.0;
  for (std::size_t i = 0; i < logp.size(); ++i) total -= targets[i] * logp[i];
  Tensor out = Tensor::scalar(total / static_cast<double>(rows));
  check_finite(out, "softmax_cross_entropy");
  if (tape.wants({&logits})) {
    tape.record(out, {logits}, [logits = logits, targets, logp, out, rows, cols]() mutable {
      if (!logits.requires_grad()) return;
      auto g = logits.grad_buffer();
      const double scale = out.grad()[0] / static_cast<double>(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t base = r * cols;
        double mass = 0.0;
        for (std::size_t c = 0; c < cols; ++c) mass += targets[base + c];
        for (std::size_t c = 0; c < cols; ++c) {
          g[base + c] += scale * (std::exp(logp[base + c]) * mass - targets[base + c]);
        }
      }
    });
  }
  return out;
}

Tensor one_hot(std::span<const int> labels, std::size_t classes) {
  if (labels.empty()) throw ShapeError("one_hot of an empty label list");
  Tensor out({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw std::out_of_range("label " + std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(classes) + ")");
    }
    out[i * classes + static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return out;
}

}  // namespace dfx::nn
