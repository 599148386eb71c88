#include "dfx/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace dfx::nn {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << " x ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  for (std::size_t extent : shape) {
    if (extent == 0) throw ShapeError("tensor extents must be positive, got " + to_string(shape));
  }
}

}  // namespace

Tensor::Tensor() : impl_(std::make_shared<Impl>()) { impl_->values.assign(1, 0.0); }

Tensor::Tensor(Shape shape, double fill) : impl_(std::make_shared<Impl>()) {
  check_extents(shape);
  impl_->values.assign(numel(shape), fill);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) : impl_(std::make_shared<Impl>()) {
  check_extents(shape);
  if (numel(shape) != values.size()) {
    throw ShapeError("shape " + to_string(shape) + " does not hold " + std::to_string(values.size()) +
                     " values");
  }
  impl_->shape = std::move(shape);
  impl_->values.assign(values.begin(), values.end());
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) throw ShapeError("axis out of range for " + to_string(shape()));
  return impl_->shape[axis];
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() needs a single-element tensor, got " + to_string(shape()));
  return impl_->values[0];
}

Tensor& Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (on && impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return *this;
}

std::span<double> Tensor::grad_buffer() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.assign(impl_->values.size(), 0.0); }

Tensor Tensor::clone() const {
  Tensor out;
  out.impl_->shape = impl_->shape;
  out.impl_->values = impl_->values;
  return out;
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != size()) {
    throw ShapeError("cannot reshape " + to_string(this->shape()) + " to " + to_string(shape));
  }
  Tensor out;
  out.impl_->shape = std::move(shape);
  out.impl_->values = impl_->values;
  return out;
}

Tensor Tensor::slice_rows(std::size_t begin, std::size_t end) const {
  if (rank() == 0 || begin >= end || end > dim(0)) {
    throw ShapeError("row slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for " + to_string(shape()));
  }
  const std::size_t row = size() / dim(0);
  Shape s = shape();
  s[0] = end - begin;
  std::vector<double> v(impl_->values.begin() + static_cast<std::ptrdiff_t>(begin * row),
                        impl_->values.begin() + static_cast<std::ptrdiff_t>(end * row));
  return Tensor(std::move(s), std::move(v));
}

bool Tensor::all_finite() const {
  return std::all_of(impl_->values.begin(), impl_->values.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  Shape s = parts.front().shape();
  if (s.empty()) throw ShapeError("concat_rows needs rank >= 1");
  std::size_t rows = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != s.size() || !std::equal(s.begin() + 1, s.end(), p.shape().begin() + 1)) {
      throw ShapeError("concat_rows shape mismatch: " + to_string(s) + " vs " + to_string(p.shape()));
    }
    rows += p.dim(0);
  }
  s[0] = rows;
  std::vector<double> v;
  v.reserve(numel(s));
  for (const Tensor& p : parts) v.insert(v.end(), p.values().begin(), p.values().end());
  return Tensor(std::move(s), std::move(v));
}

Tensor gather_rows(const Tensor& batch, std::span<const std::size_t> rows) {
  if (batch.rank() == 0 || rows.empty()) throw ShapeError("gather_rows needs a batch and indices");
  const std::size_t row = batch.size() / batch.dim(0);
  Shape s = batch.shape();
  s[0] = rows.size();
  Tensor out(s);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= batch.dim(0)) throw ShapeError("gather_rows index out of range");
    std::memcpy(&out[i * row], &batch[rows[i] * row], row * sizeof(double));
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor& scores) {
  if (scores.rank() != 2) throw ShapeError("argmax_rows needs [B, C], got " + to_string(scores.shape()));
  const std::size_t b = scores.dim(0), c = scores.dim(1);
  std::vector<int> out(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = &scores[i * c];
    out[i] = static_cast<int>(std::max_element(row, row + c) - row);
  }
  return out;
}

void check_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw NonFiniteError(std::string(what) + " produced a non-finite value");
}

}  // namespace dfx::nn
