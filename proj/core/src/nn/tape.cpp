#include "dfx/nn/tape.hpp"

#include <algorithm>

namespace dfx::nn {

bool Tape::wants(std::initializer_list<const Tensor*> inputs) const {
  if (!recording()) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t != nullptr && t->requires_grad(); });
}

void Tape::record(Tensor& output, std::vector<Tensor> inputs, Adjoint adjoint) {
  if (consumed_) throw GradientError("tape already consumed; clear() it before recording");
  output.set_requires_grad(true);
  nodes_.push_back(Node{output, std::move(inputs), std::move(adjoint)});
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw GradientError("tape already consumed");
  if (loss.size() != 1 || loss.rank() > 1) {
    throw GradientError("backward needs a scalar loss, got " + to_string(loss.shape()));
  }
  if (nodes_.empty()) throw GradientError("backward on an empty tape");
  auto produced = std::find_if(nodes_.rbegin(), nodes_.rend(),
                               [&](const Node& n) { return n.output.is_same(loss); });
  if (produced == nodes_.rend()) throw GradientError("loss was not produced on this tape");

  Tensor seed = loss;
  seed.grad_buffer()[0] += 1.0;
  for (auto it = produced; it != nodes_.rend(); ++it) {
    if (it->output.has_grad()) it->adjoint();
  }
  consumed_ = true;
}

void Tape::clear() {
  nodes_.clear();
  consumed_ = false;
}

}  // namespace dfx::nn
