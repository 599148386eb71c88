#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfx::nn {

using Shape = std::vector<std::size_t>;

/// Cache-line aligned storage. Vectorised reductions peel to alignment, so
/// a fixed base alignment keeps results independent of heap addresses.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) throw std::bad_array_new_length();
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using Storage = std::vector<double, AlignedAllocator<double>>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GradientError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Dense row-major array of doubles with an optional gradient buffer.
///
/// Tensor is a handle: copies share storage, the way parameters are shared
/// between a network, its optimizer and the tape that differentiates it.
/// Use clone() for an independent copy.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return impl_->values.size(); }

  std::span<double> values() { return impl_->values; }
  std::span<const double> values() const { return impl_->values; }
  double& operator[](std::size_t i) { return impl_->values[i]; }
  const double& operator[](std::size_t i) const { return impl_->values[i]; }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  /// Turning it on allocates a zero grad, so a leaf that takes no part in
  /// a backward pass still reads as zero gradient.
  Tensor& set_requires_grad(bool on = true);

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<double> grad() { return impl_->grad; }
  std::span<const double> grad() const { return impl_->grad; }
  /// Grad buffer, allocated as zeros on first use.
  std::span<double> grad_buffer();
  void zero_grad();
  void clear_grad() { impl_->grad.clear(); }

  /// Deep copy of the values; the copy has no grad and does not require one.
  Tensor clone() const;
  /// Reinterprets the shape; the result shares nothing with this tensor.
  Tensor reshaped(Shape shape) const;
  /// Rows [begin, end) along axis 0, copied.
  Tensor slice_rows(std::size_t begin, std::size_t end) const;

  bool is_same(const Tensor& other) const { return impl_ == other.impl_; }
  bool all_finite() const;

 private:
  struct Impl {
    Shape shape;
    Storage values;
    Storage grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

/// Stacks equally shaped row batches along axis 0.
Tensor concat_rows(std::span<const Tensor> parts);
/// Gathers rows of a batch by index along axis 0.
Tensor gather_rows(const Tensor& batch, std::span<const std::size_t> rows);

/// Row-wise argmax of a [B, C] tensor.
std::vector<int> argmax_rows(const Tensor& scores);

/// Throws NonFiniteError naming `what` if any value is NaN or infinite.
void check_finite(const Tensor& t, const char* what);

}  // namespace dfx::nn
