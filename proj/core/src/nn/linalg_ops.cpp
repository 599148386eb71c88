// Matrix products, convolution and resampling. The heavy lifting goes
// through Eigen GEMM on row-major maps over the tensor storage.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "dfx/nn/ops.hpp"

namespace dfx::nn {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<Matrix>;
using ConstMatMap = Eigen::Map<const Matrix>;

ConstMatMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols, std::size_t offset = 0) {
  return ConstMatMap(t.values().data() + offset, static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

MatMap as_matrix(std::span<double> s, std::size_t rows, std::size_t cols, std::size_t offset = 0) {
  return MatMap(s.data() + offset, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

struct ConvGeometry {
  std::size_t batch, in_channels, height, width;
  std::size_t out_channels, kernel, stride, padding;
  std::size_t out_height, out_width;

  std::size_t patch() const { return in_channels * kernel * kernel; }
  std::size_t pixels() const { return out_height * out_width; }
};

ConvGeometry conv_geometry(const Tensor& x, const Tensor& w, Conv2dOptions opts) {
  if (x.rank() != 4 || w.rank() != 4) {
    throw ShapeError("conv2d expects x[N,C,H,W] and w[O,C,k,k], got " + to_string(x.shape()) +
                     " and " + to_string(w.shape()));
  }
  if (w.dim(1) != x.dim(1)) {
    throw ShapeError("conv2d channel mismatch: input " + to_string(x.shape()) + ", kernel " +
                     to_string(w.shape()));
  }
  if (w.dim(2) != w.dim(3) || w.dim(2) > 5) {
    throw ShapeError("conv2d supports square kernels up to 5x5, got " + to_string(w.shape()));
  }
  if (opts.stride != 1 && opts.stride != 2) throw ShapeError("conv2d stride must be 1 or 2");
  ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), opts.stride, opts.padding,
                 0, 0};
  if (g.height + 2 * g.padding < g.kernel || g.width + 2 * g.padding < g.kernel) {
    throw ShapeError("conv2d kernel larger than padded input " + to_string(x.shape()));
  }
  g.out_height = (g.height + 2 * g.padding - g.kernel) / g.stride + 1;
  g.out_width = (g.width + 2 * g.padding - g.kernel) / g.stride + 1;
  return g;
}

// cols[(c*k + ky)*k + kx, oy*Wo + ox] = x[n, c, oy*s + ky - p, ox*s + kx - p]
void im2col(const double* image, const ConvGeometry& g, double* cols) {
  const std::size_t pixels = g.pixels();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    const double* plane = image + c * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        double* row = cols + ((c * g.kernel + ky) * g.kernel + kx) * pixels;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.padding);
          double* dst = row + oy * g.out_width;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) {
            std::fill(dst, dst + g.out_width, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * g.width;
          for (std::size_t ox = 0; ox < g.out_width; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width))
                          ? 0.0
                          : src[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

void col2im_add(const double* cols, const ConvGeometry& g, double* image) {
  const std::size_t pixels = g.pixels();
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    double* plane = image + c * g.height * g.width;
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const double* row = cols + ((c * g.kernel + ky) * g.kernel + kx) * pixels;
        for (std::size_t oy = 0; oy < g.out_height; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          double* dst = plane + static_cast<std::size_t>(iy) * g.width;
          const double* src = row + oy * g.out_width;
          for (std::size_t ox = 0; ox < g.out_width; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.width)) {
              dst[static_cast<std::size_t>(ix)] += src[ox];
            }
          }
        }
      }
    }
  }
}

Tensor conv2d_impl(Tape& tape, const Tensor& x, const Tensor& w, const Tensor* bias,
                   Conv2dOptions opts) {
  const ConvGeometry g = conv_geometry(x, w, opts);
  if (bias != nullptr && (bias->rank() != 1 || bias->dim(0) != g.out_channels)) {
    throw ShapeError("conv2d bias must be [" + std::to_string(g.out_channels) + "], got " +
                     to_string(bias->shape()));
  }
  Tensor out({g.batch, g.out_channels, g.out_height, g.out_width});
  const std::size_t in_image = g.in_channels * g.height * g.width;
  const std::size_t out_image = g.out_channels * g.pixels();
  Matrix cols(static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(g.pixels()));
  const ConstMatMap weights = as_matrix(w, g.out_channels, g.patch());
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(x.values().data() + n * in_image, g, cols.data());
    MatMap dst = as_matrix(out.values(), g.out_channels, g.pixels(), n * out_image);
    dst.noalias() = weights * cols;
    if (bias != nullptr) {
      for (std::size_t o = 0; o < g.out_channels; ++o) dst.row(static_cast<Eigen::Index>(o)).array() += (*bias)[o];
    }
  }
  check_finite(out, "conv2d");

  if (tape.wants({&x, &w, bias})) {
    std::vector<Tensor> deps{x, w};
    Tensor b = bias != nullptr ? *bias : Tensor();
    const bool has_bias = bias != nullptr;
    if (has_bias) deps.push_back(b);
    tape.record(out, std::move(deps), [x = x, w = w, b, has_bias, out, g, in_image, out_image]() mutable {
      auto go = out.grad();
      Matrix cols(static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(g.pixels()));
      Matrix dcols(static_cast<Eigen::Index>(g.patch()), static_cast<Eigen::Index>(g.pixels()));
      const ConstMatMap weights = as_matrix(w, g.out_channels, g.patch());
      for (std::size_t n = 0; n < g.batch; ++n) {
        const ConstMatMap dout(go.data() + n * out_image, static_cast<Eigen::Index>(g.out_channels),
                               static_cast<Eigen::Index>(g.pixels()));
        if (w.requires_grad()) {
          im2col(x.values().data() + n * in_image, g, cols.data());
          as_matrix(w.grad_buffer(), g.out_channels, g.patch()).noalias() += dout * cols.transpose();
        }
        if (has_bias && b.requires_grad()) {
          auto gb = b.grad_buffer();
          for (std::size_t o = 0; o < g.out_channels; ++o) gb[o] += dout.row(static_cast<Eigen::Index>(o)).sum();
        }
        if (x.requires_grad()) {
          dcols.noalias() = weights.transpose() * dout;
          col2im_add(dcols.data(), g, x.grad_buffer().data() + n * in_image);
        }
      }
    });
  }
  return out;
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul shape mismatch: " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out({m, n});
  as_matrix(out.values(), m, n).noalias() = as_matrix(a, m, k) * as_matrix(b, k, n);
  check_finite(out, "matmul");
  if (tape.wants({&a, &b})) {
    tape.record(out, {a, b}, [a = a, b = b, out, m, k, n]() mutable {
      const ConstMatMap go(out.grad().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      if (a.requires_grad()) as_matrix(a.grad_buffer(), m, k).noalias() += go * as_matrix(b, k, n).transpose();
      if (b.requires_grad()) as_matrix(b.grad_buffer(), k, n).noalias() += as_matrix(a, m, k).transpose() * go;
    });
  }
  return out;
}

Tensor linear(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || bias.rank() != 1 || x.dim(1) != weight.dim(1) ||
      bias.dim(0) != weight.dim(0)) {
    throw ShapeError("linear shape mismatch: x " + to_string(x.shape()) + ", weight " +
                     to_string(weight.shape()) + ", bias " + to_string(bias.shape()));
  }
  const std::size_t rows = x.dim(0), in = x.dim(1), outs = weight.dim(0);
  Tensor out({rows, outs});
  MatMap dst = as_matrix(out.values(), rows, outs);
  dst.noalias() = as_matrix(x, rows, in) * as_matrix(weight, outs, in).transpose();
  const Eigen::Map<const Eigen::RowVectorXd> bvec(bias.values().data(), static_cast<Eigen::Index>(outs));
  dst.rowwise() += bvec;
  check_finite(out, "linear");
  if (tape.wants({&x, &weight, &bias})) {
    tape.record(out, {x, weight, bias}, [x = x, w = weight, b = bias, out, rows, in, outs]() mutable {
      const ConstMatMap go(out.grad().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(outs));
      if (x.requires_grad()) as_matrix(x.grad_buffer(), rows, in).noalias() += go * as_matrix(w, outs, in);
      if (w.requires_grad()) as_matrix(w.grad_buffer(), outs, in).noalias() += go.transpose() * as_matrix(x, rows, in);
      if (b.requires_grad()) {
        Eigen::Map<Eigen::RowVectorXd> gb(b.grad_buffer().data(), static_cast<Eigen::Index>(outs));
        gb += go.colwise().sum();
      }
    });
  }
  return out;
}

Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, Conv2dOptions opts) {
  return conv2d_impl(tape, x, weight, nullptr, opts);
}

Tensor conv2d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, Conv2dOptions opts) {
  return conv2d_impl(tape, x, weight, &bias, opts);
}

Tensor max_pool2d(Tape& tape, const Tensor& x, std::size_t window) {
  if (x.rank() != 4) throw ShapeError("max_pool2d expects [N,C,H,W], got " + to_string(x.shape()));
  if (window == 0 || x.dim(2) < window || x.dim(3) < window) {
    throw ShapeError("max_pool2d window does not fit " + to_string(x.shape()));
  }
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h / window, ow = w / window;
  Tensor out({x.dim(0), x.dim(1), oh, ow});
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t p = 0; p < planes; ++p) {
    const double* plane = &x[p * h * w];
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (oy * window) * w + ox * window;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t idx = (oy * window + dy) * w + ox * window + dx;
            if (plane[idx] > plane[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        out[o] = plane[best];
        (*argmax)[o] = p * h * w + best;
      }
    }
  }
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out, argmax]() mutable {
      if (!x.requires_grad()) return;
      auto gx = x.grad_buffer();
      auto go = out.grad();
      for (std::size_t o = 0; o < go.size(); ++o) gx[(*argmax)[o]] += go[o];
    });
  }
  return out;
}

Tensor upsample_nearest(Tape& tape, const Tensor& x, std::size_t factor) {
  if (x.rank() != 4) throw ShapeError("upsample_nearest expects [N,C,H,W], got " + to_string(x.shape()));
  if (factor == 0) throw ShapeError("upsample factor must be positive");
  const std::size_t planes = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h * factor, ow = w * factor;
  Tensor out({x.dim(0), x.dim(1), oh, ow});
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        out[(p * oh + oy) * ow + ox] = x[(p * h + oy / factor) * w + ox / factor];
      }
    }
  }
  if (tape.wants({&x})) {
    tape.record(out, {x}, [x = x, out, planes, h, w, oh, ow, factor]() mutable {
      if (!x.requires_grad()) return;
      auto gx = x.grad_buffer();
      auto go = out.grad();
      for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
          for (std::size_t ox = 0; ox < ow; ++ox) {
            gx[(p * h + oy / factor) * w + ox / factor] += go[(p * oh + oy) * ow + ox];
          }
        }
      }
    });
  }
  return out;
}

namespace {

struct ChannelLayout {
  std::size_t n, c, inner;
  std::size_t operator()(std::size_t b, std::size_t ch, std::size_t k) const { return (b * c + ch) * inner + k; }
};

ChannelLayout channel_layout(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps, const char* op) {
  if (x.rank() != 2 && x.rank() != 4) {
    throw ShapeError(std::string(op) + " expects [N,D] or [N,C,H,W], got " + to_string(x.shape()));
  }
  const std::size_t c = x.dim(1);
  if (gamma.shape() != Shape{c} || beta.shape() != Shape{c}) {
    throw ShapeError(std::string(op) + " affine parameters must be [" + std::to_string(c) + "], got " +
                     to_string(gamma.shape()) + " and " + to_string(beta.shape()));
  }
  if (!(eps > 0.0)) throw std::invalid_argument(std::string(op) + " eps must be positive");
  return {x.dim(0), c, x.rank() == 4 ? x.dim(2) * x.dim(3) : 1};
}

}  // namespace

Tensor batch_norm(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const ChannelLayout index = channel_layout(x, gamma, beta, eps, "batch_norm");
  const std::size_t n = index.n, c = index.c, inner = index.inner;
  if (n * inner < 2) throw ShapeError("batch_norm needs at least two values per channel");
  const double m = static_cast<double>(n * inner);

  auto inv_std = std::make_shared<std::vector<double>>(c);
  Tensor xhat(x.shape());
  Tensor out(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mu = 0.0;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t k = 0; k < inner; ++k) mu += x[index(b, ch, k)];
    mu /= m;
    double var = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t k = 0; k < inner; ++k) {
        const double d = x[index(b, ch, k)] - mu;
        var += d * d;
      }
    }
    var /= m;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[ch] = is;
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t k = 0; k < inner; ++k) {
        const std::size_t i = index(b, ch, k);
        xhat[i] = (x[i] - mu) * is;
        out[i] = gamma[ch] * xhat[i] + beta[ch];
      }
    }
  }
  check_finite(out, "batch_norm");
  if (tape.wants({&x, &gamma, &beta})) {
    tape.record(out, {x, gamma, beta},
                [x = x, gamma = gamma, beta = beta, out, xhat, inv_std, n, c, inner, m, index]() mutable {
                  auto go = out.grad();
                  for (std::size_t ch = 0; ch < c; ++ch) {
                    double sum_dy = 0.0, sum_dy_xhat = 0.0;
                    for (std::size_t b = 0; b < n; ++b) {
                      for (std::size_t k = 0; k < inner; ++k) {
                        const std::size_t i = index(b, ch, k);
                        sum_dy += go[i];
                        sum_dy_xhat += go[i] * xhat[i];
                      }
                    }
                    if (gamma.requires_grad()) gamma.grad_buffer()[ch] += sum_dy_xhat;
                    if (beta.requires_grad()) beta.grad_buffer()[ch] += sum_dy;
                    if (!x.requires_grad()) continue;
                    auto gx = x.grad_buffer();
                    const double g = gamma[ch], is = (*inv_std)[ch];
                    for (std::size_t b = 0; b < n; ++b) {
                      for (std::size_t k = 0; k < inner; ++k) {
                        const std::size_t i = index(b, ch, k);
                        gx[i] += g * is / m * (m * go[i] - sum_dy - xhat[i] * sum_dy_xhat);
                      }
                    }
                  }
                });
  }
  return out;
}

}  // namespace dfx::nn
