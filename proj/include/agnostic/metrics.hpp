#pragma once

#include <span>
#include <vector>

#include "agnostic/dataset.hpp"
#include "agnostic/network.hpp"

namespace agnostic {

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> row);

// Fraction of rows of logits [N, L] whose argmax equals the label. Throws
// std::invalid_argument on an empty set.
double accuracy_from_logits(const Tensor& logits, std::span<const int> labels);

// Eval-mode logits (dropout off, centre crop) for every example.
Tensor evaluate_logits(const HeadView& view, std::span<const Example> examples,
                       std::size_t crop, std::size_t chunk = 128);

// Eval-mode flattened representation of every example, [N, D].
Tensor evaluate_representation(const LayerStack& features, const ParamStore& params,
                               std::span<const Example> examples, std::size_t crop,
                               std::size_t chunk = 128);

std::vector<int> predict(const HeadView& view, std::span<const Example> examples,
                         std::size_t crop);

// Accuracy of `view` at predicting `which` label of the examples.
double accuracy(const HeadView& view, std::span<const Example> examples, Concept which,
                std::size_t crop);

}  // namespace agnostic
