#include "agnostic/tensor_ops.hpp"

#include <algorithm>
#include <string>

#include "kernels.hpp"

namespace agnostic {
namespace {

using NodePtr = std::shared_ptr<detail::TensorNode>;

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                   " vs " + shape_string(b.shape()));
}

// Returns true when b is broadcast over the leading extent of a.
bool check_elementwise(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return false;
  if (a.rank() >= 2 && b.rank() + 1 == a.rank() &&
      std::equal(b.shape().begin(), b.shape().end(), a.shape().begin() + 1)) {
    return true;
  }
  mismatch(op, a, b);
}

// Sums a gradient of a's shape over the batch into b's gradient.
void reduce_into(std::span<const double> g, std::span<double> b_grad, double sign) {
  const std::size_t inner = b_grad.size();
  for (std::size_t i = 0; i < g.size(); ++i) b_grad[i % inner] += sign * g[i];
}

Tensor add_or_sub(const char* op, const Tensor& a, const Tensor& b, double sign) {
  const bool broadcast = check_elementwise(op, a, b);
  const std::size_t inner = b.size();
  std::vector<double> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + sign * bv[i % inner];
  NodePtr an = a.node(), bn = b.node();
  return make_op_result(a.shape(), std::move(out), {&a, &b},
                        [an, bn, sign, broadcast](std::span<const double> g) {
                          if (an->requires_grad) {
                            auto ga = detail::grad_buffer(*an);
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                          }
                          if (bn->requires_grad) {
                            auto gb = detail::grad_buffer(*bn);
                            if (broadcast) {
                              reduce_into(g, gb, sign);
                            } else {
                              for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
                            }
                          }
                        });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_or_sub("add", a, b, 1.0); }

Tensor sub(const Tensor& a, const Tensor& b) { return add_or_sub("sub", a, b, -1.0); }

Tensor mul(const Tensor& a, const Tensor& b) {
  const bool broadcast = check_elementwise("mul", a, b);
  const std::size_t inner = b.size();
  std::vector<double> out(a.size());
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i % inner];
  NodePtr an = a.node(), bn = b.node();
  return make_op_result(a.shape(), std::move(out), {&a, &b},
                        [an, bn, broadcast, inner](std::span<const double> g) {
                          if (an->requires_grad) {
                            auto ga = detail::grad_buffer(*an);
                            for (std::size_t i = 0; i < g.size(); ++i)
                              ga[i] += g[i] * bn->data[i % inner];
                          }
                          if (bn->requires_grad) {
                            auto gb = detail::grad_buffer(*bn);
                            if (broadcast) {
                              for (std::size_t i = 0; i < g.size(); ++i)
                                gb[i % inner] += g[i] * an->data[i];
                            } else {
                              for (std::size_t i = 0; i < g.size(); ++i)
                                gb[i] += g[i] * an->data[i];
                            }
                          }
                        });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  NodePtr an = a.node();
  return make_op_result(a.shape(), std::move(out), {&a},
                        [an, factor](std::span<const double> g) {
                          auto ga = detail::grad_buffer(*an);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
                        });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) mismatch("matmul", a, b);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  kernels::gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  NodePtr an = a.node(), bn = b.node();
  return make_op_result({m, n}, std::move(out), {&a, &b},
                        [an, bn, m, k, n](std::span<const double> g) {
                          if (an->requires_grad) {
                            // dA = G * B^T
                            kernels::gemm_nt(g.data(), bn->data.data(),
                                             detail::grad_buffer(*an).data(), m, n, k);
                          }
                          if (bn->requires_grad) {
                            // dB = A^T * G
                            kernels::gemm_tn(an->data.data(), g.data(),
                                             detail::grad_buffer(*bn).data(), k, m, n);
                          }
                        });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.size()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                     shape_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  NodePtr an = a.node();
  return make_op_result(std::move(shape), std::move(out), {&a},
                        [an](std::span<const double> g) {
                          auto ga = detail::grad_buffer(*an);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                        });
}

Tensor flatten(const Tensor& a) {
  if (a.rank() < 2) {
    throw ShapeError("flatten: needs a leading batch extent, got " + shape_string(a.shape()));
  }
  return reshape(a, {a.dim(0), a.size() / a.dim(0)});
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  NodePtr an = a.node();
  return make_op_result({1}, {total}, {&a}, [an](std::span<const double> g) {
    auto ga = detail::grad_buffer(*an);
    for (double& v : ga) v += g[0];
  });
}

Tensor mean(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  const double n = static_cast<double>(a.size());
  NodePtr an = a.node();
  return make_op_result({1}, {total / n}, {&a}, [an, n](std::span<const double> g) {
    auto ga = detail::grad_buffer(*an);
    for (double& v : ga) v += g[0] / n;
  });
}

Tensor max(const Tensor& a) {
  auto v = a.data();
  const std::size_t arg =
      static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  NodePtr an = a.node();
  return make_op_result({1}, {v[arg]}, {&a}, [an, arg](std::span<const double> g) {
    detail::grad_buffer(*an)[arg] += g[0];
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows) {
  if (a.rank() < 1 || rows.empty()) {
    throw ShapeError("gather_rows: need at least one row from " + shape_string(a.shape()));
  }
  const std::size_t row_size = a.size() / a.dim(0);
  Shape shape = a.shape();
  shape[0] = rows.size();
  std::vector<double> out(rows.size() * row_size);
  auto av = a.data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= a.dim(0)) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[r]) +
                       " out of range for " + shape_string(a.shape()));
    }
    std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(rows[r] * row_size), row_size,
                out.begin() + static_cast<std::ptrdiff_t>(r * row_size));
  }
  NodePtr an = a.node();
  std::vector<std::size_t> index(rows.begin(), rows.end());
  return make_op_result(std::move(shape), std::move(out), {&a},
                        [an, index = std::move(index), row_size](std::span<const double> g) {
                          auto ga = detail::grad_buffer(*an);
                          for (std::size_t r = 0; r < index.size(); ++r)
                            for (std::size_t j = 0; j < row_size; ++j)
                              ga[index[r] * row_size + j] += g[r * row_size + j];
                        });
}

}  // namespace agnostic
