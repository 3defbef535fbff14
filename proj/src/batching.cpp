#include "agnostic/batching.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace agnostic {
namespace {

std::vector<std::size_t> shuffled_range(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

}  // namespace

std::vector<BatchPlan> plan_batches(std::size_t n_target, std::size_t n_context,
                                    std::size_t batch_size, std::uint64_t seed,
                                    std::uint64_t epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  Rng rng(derive_seed(seed, "shuffle", epoch));
  const auto target = shuffled_range(n_target, rng);
  const auto context = shuffled_range(n_context, rng);
  const std::size_t total = n_target + n_context;
  std::vector<BatchPlan> plans;
  for (std::size_t start = 0; start < total; start += batch_size) {
    const std::size_t end = std::min(start + batch_size, total);
    // Target examples allotted to positions [0, p) of the combined order.
    const std::size_t t_begin = start * n_target / total;
    const std::size_t t_end = end * n_target / total;
    BatchPlan plan;
    plan.target.assign(target.begin() + static_cast<std::ptrdiff_t>(t_begin),
                       target.begin() + static_cast<std::ptrdiff_t>(t_end));
    plan.context.assign(context.begin() + static_cast<std::ptrdiff_t>(start - t_begin),
                        context.begin() + static_cast<std::ptrdiff_t>(end - t_end));
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::vector<std::size_t> LabeledBatch::target_rows() const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < target_labels.size(); ++i)
    if (target_labels[i]) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> LabeledBatch::context_rows() const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < target_labels.size(); ++i)
    if (!target_labels[i]) rows.push_back(i);
  return rows;
}

std::vector<int> LabeledBatch::present_target_labels() const {
  std::vector<int> labels;
  for (const auto& label : target_labels)
    if (label) labels.push_back(*label);
  return labels;
}

LabeledBatch make_batch(std::span<const Example* const> examples, std::size_t crop,
                        Rng* augment_rng) {
  if (examples.empty()) throw std::invalid_argument("make_batch: no examples");
  const std::size_t channels = examples.front()->image.dim(0);
  const std::size_t plane = channels * crop * crop;
  LabeledBatch batch;
  batch.images = Tensor({examples.size(), channels, crop, crop});
  auto dst = batch.images.mutable_data();
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example view = augment_rng != nullptr ? augment(*examples[i], crop, *augment_rng)
                                                : center_crop(*examples[i], crop);
    if (view.image.size() != plane) {
      throw ShapeError("make_batch: example " + examples[i]->id + " has shape " +
                       shape_string(view.image.shape()));
    }
    std::copy(view.image.data().begin(), view.image.data().end(),
              dst.begin() + static_cast<std::ptrdiff_t>(i * plane));
    batch.target_labels.push_back(view.target_label);
    batch.protected_labels.push_back(view.protected_label);
  }
  return batch;
}

std::vector<const Example*> gather(const BatchPlan& plan, std::span<const Example> target_pool,
                                   std::span<const Example> context_pool) {
  std::vector<const Example*> out;
  out.reserve(plan.size());
  for (std::size_t i : plan.target) out.push_back(&target_pool[i]);
  for (std::size_t i : plan.context) out.push_back(&context_pool[i]);
  return out;
}

}  // namespace agnostic
