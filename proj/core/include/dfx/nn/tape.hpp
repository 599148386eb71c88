#pragma once

#include <functional>
#include <initializer_list>
#include <vector>

#include "dfx/nn/tensor.hpp"

namespace dfx::nn {

/// Records operations in execution order so that adjoints can be replayed
/// backwards. Recording order is a topological order, so the reverse sweep
/// in backward() visits every node after all of its consumers.
///
/// A tape differentiates one forward pass. After backward() it is consumed
/// and must be clear()ed before the next pass. A tape built with
/// Mode::Inference never records anything.
class Tape {
 public:
  enum class Mode { Record, Inference };

  /// Reads the output's grad and accumulates into the inputs' grads.
  using Adjoint = std::function<void()>;

  explicit Tape(Mode mode = Mode::Record) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape inference() { return Tape(Mode::Inference); }

  bool recording() const { return mode_ == Mode::Record; }

  /// True when an op over `inputs` has to be recorded.
  bool wants(std::initializer_list<const Tensor*> inputs) const;

  /// Registers `output` as produced from `inputs`; marks it as requiring grad.
  void record(Tensor& output, std::vector<Tensor> inputs, Adjoint adjoint);

  /// Seeds d(loss)/d(loss) = 1 and runs every adjoint in reverse order.
  /// Leaf grads accumulate, so zero them before the forward pass.
  void backward(const Tensor& loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    Tensor output;
    std::vector<Tensor> inputs;
    Adjoint adjoint;
  };

  Mode mode_;
  bool consumed_ = false;
  std::vector<Node> nodes_;
};

}  // namespace dfx::nn
