#pragma once

#include <span>

#include "agnostic/random.hpp"
#include "agnostic/tensor.hpp"

namespace agnostic {

enum class Mode { train, eval };

// Cross-correlation (no kernel flip) with stride 1 and same padding.
// input [N, C, H, W], weights [F, C, k, k] with odd k, bias [F]
// -> [N, F, H, W].
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias);

// 2x2 window, stride 2. Odd extents are padded with -inf on the bottom and
// right, so the output is [N, C, ceil(H/2), ceil(W/2)]. The gradient goes to
// the first maximal element of each window in row-major scan order.
Tensor maxpool2d(const Tensor& input);

// max(x, 0); the subgradient at 0 is 0.
Tensor relu(const Tensor& input);
// x for x > 0, slope * x otherwise; the subgradient at 0 is `slope`.
Tensor leaky_relu(const Tensor& input, double slope);
Tensor tanh(const Tensor& input);

// input [N, in] * weights [in, out] + bias [out]
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

// Inverted dropout mask: each entry is 0 with probability `rate` and
// 1 / (1 - rate) otherwise.
Tensor dropout_mask(const Shape& shape, double rate, Rng& rng);

// Train mode multiplies by a fresh mask; eval mode (or rate 0) returns the
// input unchanged.
Tensor dropout(const Tensor& input, double rate, Mode mode, Rng& rng);

// Mean over the batch of -log softmax(logits)[label], via log-sum-exp.
// logits [N, L], labels in [0, L).
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

// Per-example losses of softmax_cross_entropy without recording anything.
std::vector<double> cross_entropy_values(const Tensor& logits, std::span<const int> labels);

// Gradient reversal: identity forward, negated gradient backward.
Tensor grl(const Tensor& input);

// Identity forward; backward multiplies the gradient by `factor`. A factor of
// 0 returns a detached copy, so nothing flows back at all.
Tensor scale_grad(const Tensor& input, double factor);

}  // namespace agnostic
