#pragma once

#include <cstddef>
#include <span>

#include "agnostic/tensor.hpp"

namespace agnostic {

// Elementwise arithmetic. Shapes must match exactly, or `b` may omit the
// leading (batch) extent of `a`, in which case it is repeated over the batch.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor scale(const Tensor& a, double factor);
Tensor neg(const Tensor& a);

// [m, k] x [k, n] -> [m, n]
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& a, Shape shape);
// [N, ...] -> [N, prod(...)]
Tensor flatten(const Tensor& a);

// Full reductions to shape {1}.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Gradient goes to the first maximal element in row-major order.
Tensor max(const Tensor& a);

// Selects entries of the leading dimension, in the given order.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> rows);

}  // namespace agnostic
