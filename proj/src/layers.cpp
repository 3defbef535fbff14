#include "agnostic/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "agnostic/tensor_ops.hpp"
#include "kernels.hpp"

namespace agnostic {
namespace {

using NodePtr = std::shared_ptr<detail::TensorNode>;

struct ConvGeometry {
  std::size_t channels, height, width, kernel, pad;
  std::size_t patch() const { return channels * kernel * kernel; }
  std::size_t pixels() const { return height * width; }
};

// col[(c, ky, kx), (y, x)] = image[c, y + ky - pad, x + kx - pad], zero outside.
void im2col(const double* image, const ConvGeometry& g, double* col) {
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    const double* plane = image + c * g.pixels();
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx, ++row) {
        double* dst = col + row * g.pixels();
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        for (std::ptrdiff_t y = 0; y < h; ++y) {
          double* out = dst + y * w;
          const std::ptrdiff_t sy = y + dy;
          if (sy < 0 || sy >= h) {
            std::fill(out, out + w, 0.0);
            continue;
          }
          const double* src = plane + sy * w;
          for (std::ptrdiff_t x = 0; x < w; ++x) {
            const std::ptrdiff_t sx = x + dx;
            out[x] = (sx < 0 || sx >= w) ? 0.0 : src[sx];
          }
        }
      }
    }
  }
}

void col2im(const double* col, const ConvGeometry& g, double* image) {
  const auto h = static_cast<std::ptrdiff_t>(g.height);
  const auto w = static_cast<std::ptrdiff_t>(g.width);
  const auto pad = static_cast<std::ptrdiff_t>(g.pad);
  std::size_t row = 0;
  for (std::size_t c = 0; c < g.channels; ++c) {
    double* plane = image + c * g.pixels();
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx, ++row) {
        const double* src = col + row * g.pixels();
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        for (std::ptrdiff_t y = 0; y < h; ++y) {
          const std::ptrdiff_t sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          double* dst = plane + sy * w;
          const double* in = src + y * w;
          for (std::ptrdiff_t x = 0; x < w; ++x) {
            const std::ptrdiff_t sx = x + dx;
            if (sx >= 0 && sx < w) dst[sx] += in[x];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() != 4 || weights.rank() != 4) {
    throw ShapeError("conv2d: expected NCHW input and FCkk weights, got " +
                     shape_string(input.shape()) + " and " + shape_string(weights.shape()));
  }
  if (input.dim(1) != weights.dim(1)) {
    throw ShapeError("conv2d: input has " + std::to_string(input.dim(1)) +
                     " channels but weights expect " + std::to_string(weights.dim(1)) +
                     " (" + shape_string(input.shape()) + " vs " +
                     shape_string(weights.shape()) + ")");
  }
  const std::size_t k = weights.dim(2);
  if (weights.dim(3) != k || k % 2 == 0) {
    throw ShapeError("conv2d: kernel must be square with odd size, got " +
                     shape_string(weights.shape()));
  }
  const std::size_t filters = weights.dim(0);
  if (bias.shape() != Shape{filters}) {
    throw ShapeError("conv2d: bias " + shape_string(bias.shape()) + " does not match " +
                     std::to_string(filters) + " filters");
  }
  const std::size_t batch = input.dim(0);
  const ConvGeometry g{input.dim(1), input.dim(2), input.dim(3), k, k / 2};
  const std::size_t patch = g.patch();
  const std::size_t pixels = g.pixels();

  std::vector<double> cols(batch * patch * pixels);
  std::vector<double> out(batch * filters * pixels);
  const double* in = input.data().data();
  const double* wt = weights.data().data();
  const double* b = bias.data().data();
  for (std::size_t n = 0; n < batch; ++n) {
    double* col = cols.data() + n * patch * pixels;
    im2col(in + n * g.channels * pixels, g, col);
    double* dst = out.data() + n * filters * pixels;
    for (std::size_t f = 0; f < filters; ++f)
      std::fill(dst + f * pixels, dst + (f + 1) * pixels, b[f]);
    kernels::gemm_nn(wt, col, dst, filters, patch, pixels);
  }

  NodePtr xn = input.node(), wn = weights.node(), bn = bias.node();
  return make_op_result(
      {batch, filters, g.height, g.width}, std::move(out), {&input, &weights, &bias},
      [xn, wn, bn, g, batch, filters, cols = std::move(cols)](std::span<const double> grad) {
        const std::size_t patch = g.patch();
        const std::size_t pixels = g.pixels();
        std::vector<double> dcol;
        for (std::size_t n = 0; n < batch; ++n) {
          const double* gn = grad.data() + n * filters * pixels;
          const double* col = cols.data() + n * patch * pixels;
          if (wn->requires_grad) {
            kernels::gemm_nt(gn, col, detail::grad_buffer(*wn).data(), filters, pixels, patch);
          }
          if (bn->requires_grad) {
            auto gb = detail::grad_buffer(*bn);
            for (std::size_t f = 0; f < filters; ++f) {
              double s = 0.0;
              for (std::size_t p = 0; p < pixels; ++p) s += gn[f * pixels + p];
              gb[f] += s;
            }
          }
          if (xn->requires_grad) {
            dcol.assign(patch * pixels, 0.0);
            kernels::gemm_tn(wn->data.data(), gn, dcol.data(), patch, filters, pixels);
            col2im(dcol.data(), g,
                   detail::grad_buffer(*xn).data() + n * g.channels * pixels);
          }
        }
      });
}

Tensor maxpool2d(const Tensor& input) {
  if (input.rank() != 4) {
    throw ShapeError("maxpool2d: expected NCHW input, got " + shape_string(input.shape()));
  }
  const std::size_t planes = input.dim(0) * input.dim(1);
  const std::size_t h = input.dim(2), w = input.dim(3);
  const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  std::vector<double> out(planes * oh * ow);
  std::vector<std::size_t> argmax(out.size());
  auto in = input.data();
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t base = p * h * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_index = 0;
        bool first = true;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t sy = 2 * y + dy, sx = 2 * x + dx;
            if (sy >= h || sx >= w) continue;
            const std::size_t idx = base + sy * w + sx;
            if (first || in[idx] > best) {
              best = in[idx];
              best_index = idx;
              first = false;
            }
          }
        }
        const std::size_t o = (p * oh + y) * ow + x;
        out[o] = best;
        argmax[o] = best_index;
      }
    }
  }
  NodePtr xn = input.node();
  return make_op_result({input.dim(0), input.dim(1), oh, ow}, std::move(out), {&input},
                        [xn, argmax = std::move(argmax)](std::span<const double> g) {
                          auto gx = detail::grad_buffer(*xn);
                          for (std::size_t o = 0; o < g.size(); ++o) gx[argmax[o]] += g[o];
                        });
}

Tensor relu(const Tensor& input) {
  std::vector<double> out(input.data().begin(), input.data().end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  NodePtr xn = input.node();
  return make_op_result(input.shape(), std::move(out), {&input},
                        [xn](std::span<const double> g) {
                          auto gx = detail::grad_buffer(*xn);
                          for (std::size_t i = 0; i < g.size(); ++i)
                            if (xn->data[i] > 0.0) gx[i] += g[i];
                        });
}

Tensor leaky_relu(const Tensor& input, double slope) {
  std::vector<double> out(input.data().begin(), input.data().end());
  for (double& v : out) v = v > 0.0 ? v : slope * v;
  NodePtr xn = input.node();
  return make_op_result(input.shape(), std::move(out), {&input},
                        [xn, slope](std::span<const double> g) {
                          auto gx = detail::grad_buffer(*xn);
                          for (std::size_t i = 0; i < g.size(); ++i)
                            gx[i] += xn->data[i] > 0.0 ? g[i] : slope * g[i];
                        });
}

Tensor tanh(const Tensor& input) {
  std::vector<double> out(input.data().begin(), input.data().end());
  for (double& v : out) v = std::tanh(v);
  const std::vector<double> y = out;
  NodePtr xn = input.node();
  return make_op_result(input.shape(), std::move(out), {&input},
                        [xn, y](std::span<const double> g) {
                          auto gx = detail::grad_buffer(*xn);
                          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
                        });
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() != 2 || weights.rank() != 2 || input.dim(1) != weights.dim(0) ||
      bias.shape() != Shape{weights.dim(1)}) {
    throw ShapeError("dense: shape mismatch input " + shape_string(input.shape()) +
                     " vs weights " + shape_string(weights.shape()) + " and bias " +
                     shape_string(bias.shape()));
  }
  return add(matmul(input, weights), bias);
}

Tensor dropout_mask(const Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  Tensor mask(shape);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.mutable_data()) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

Tensor dropout(const Tensor& input, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (mode == Mode::eval || rate == 0.0) return input;
  return mul(input, dropout_mask(input.shape(), rate, rng));
}

namespace {

void check_logits(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("softmax_cross_entropy: logits " + shape_string(logits.shape()) +
                     " vs " + std::to_string(labels.size()) + " labels");
  }
  const auto classes = static_cast<int>(logits.dim(1));
  for (int label : labels) {
    if (label < 0 || label >= classes) {
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(label) +
                              " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

// Fills `probs` with softmax rows and returns per-example losses.
std::vector<double> softmax_rows(const Tensor& logits, std::span<const int> labels,
                                 std::vector<double>* probs) {
  const std::size_t n = logits.dim(0), classes = logits.dim(1);
  auto z = logits.data();
  std::vector<double> losses(n);
  if (probs != nullptr) probs->resize(n * classes);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = z.data() + i * classes;
    const double top = *std::max_element(row, row + classes);
    double total = 0.0;
    for (std::size_t j = 0; j < classes; ++j) total += std::exp(row[j] - top);
    const double log_norm = top + std::log(total);
    losses[i] = log_norm - row[labels[i]];
    if (probs != nullptr) {
      for (std::size_t j = 0; j < classes; ++j)
        (*probs)[i * classes + j] = std::exp(row[j] - log_norm);
    }
  }
  return losses;
}

}  // namespace

std::vector<double> cross_entropy_values(const Tensor& logits, std::span<const int> labels) {
  check_logits(logits, labels);
  return softmax_rows(logits, labels, nullptr);
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  check_logits(logits, labels);
  if (labels.empty()) throw ShapeError("softmax_cross_entropy: empty batch");
  std::vector<double> probs;
  const std::vector<double> losses = softmax_rows(logits, labels, &probs);
  double total = 0.0;
  for (double l : losses) total += l;
  const std::size_t n = labels.size(), classes = logits.dim(1);
  NodePtr zn = logits.node();
  std::vector<int> targets(labels.begin(), labels.end());
  return make_op_result(
      {1}, {total / static_cast<double>(n)}, {&logits},
      [zn, probs = std::move(probs), targets = std::move(targets), n,
       classes](std::span<const double> g) {
        auto gz = detail::grad_buffer(*zn);
        const double s = g[0] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < classes; ++j) {
            const double onehot = static_cast<int>(j) == targets[i] ? 1.0 : 0.0;
            gz[i * classes + j] += s * (probs[i * classes + j] - onehot);
          }
        }
      });
}

Tensor grl(const Tensor& input) {
  std::vector<double> out(input.data().begin(), input.data().end());
  NodePtr xn = input.node();
  return make_op_result(input.shape(), std::move(out), {&input},
                        [xn](std::span<const double> g) {
                          auto gx = detail::grad_buffer(*xn);
                          for (std::size_t i = 0; i < g.size(); ++i) gx[i] -= g[i];
                        });
}

Tensor scale_grad(const Tensor& input, double factor) {
  if (factor == 0.0) return input.detach();
  std::vector<double> out(input.data().begin(), input.data().end());
  NodePtr xn = input.node();
  return make_op_result(input.shape(), std::move(out), {&input},
                        [xn, factor](std::span<const double> g) {
                          auto gx = detail::grad_buffer(*xn);
                          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
                        });
}

}  // namespace agnostic
