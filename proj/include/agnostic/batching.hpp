#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "agnostic/dataset.hpp"

namespace agnostic {

// Indices into the target pool and the context pool making up one batch.
struct BatchPlan {
  std::vector<std::size_t> target;
  std::vector<std::size_t> context;
  std::size_t size() const { return target.size() + context.size(); }
};

// Shuffles both pools with a stream derived from (seed, epoch) and cuts the
// combined sequence into batches of `batch_size`, keeping the last partial
// batch. Each batch's target/context split follows n_target : n_context to
// within one example.
std::vector<BatchPlan> plan_batches(std::size_t n_target, std::size_t n_context,
                                    std::size_t batch_size, std::uint64_t seed,
                                    std::uint64_t epoch);

// Images and labels ready for a forward pass. Rows without a target label
// are context-only examples.
struct LabeledBatch {
  Tensor images;  // [B, C, h, w]
  std::vector<std::optional<int>> target_labels;
  std::vector<int> protected_labels;

  std::size_t size() const { return protected_labels.size(); }
  std::vector<std::size_t> target_rows() const;
  std::vector<std::size_t> context_rows() const;
  // Target labels of target_rows(), in the same order.
  std::vector<int> present_target_labels() const;
};

// Stacks examples into a batch. With an augmentation stream each example is
// randomly cropped and flipped; without one it is centre-cropped.
LabeledBatch make_batch(std::span<const Example* const> examples, std::size_t crop,
                        Rng* augment_rng);

std::vector<const Example*> gather(const BatchPlan& plan, std::span<const Example> target_pool,
                                   std::span<const Example> context_pool);

}  // namespace agnostic
