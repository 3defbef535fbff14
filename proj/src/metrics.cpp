#include "agnostic/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "agnostic/batching.hpp"
#include "agnostic/tensor_ops.hpp"

namespace agnostic {
namespace {

// Runs `fn` on consecutive chunks of centre-cropped examples and stacks the
// row outputs.
template <typename Fn>
Tensor evaluate_chunks(std::span<const Example> examples, std::size_t crop, std::size_t chunk,
                       Fn&& fn) {
  if (examples.empty()) throw std::invalid_argument("evaluation set is empty");
  std::vector<double> rows;
  std::size_t width = 0;
  for (std::size_t start = 0; start < examples.size(); start += chunk) {
    const std::size_t end = std::min(start + chunk, examples.size());
    std::vector<const Example*> refs;
    for (std::size_t i = start; i < end; ++i) refs.push_back(&examples[i]);
    const LabeledBatch batch = make_batch(refs, crop, nullptr);
    const Tensor out = fn(batch.images);
    width = out.size() / out.dim(0);
    rows.insert(rows.end(), out.data().begin(), out.data().end());
  }
  return Tensor({examples.size(), width}, std::move(rows));
}

}  // namespace

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

double accuracy_from_logits(const Tensor& logits, std::span<const int> labels) {
  if (labels.empty()) throw std::invalid_argument("accuracy: empty evaluation set");
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("accuracy: logits " + shape_string(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t classes = logits.dim(1);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = logits.data().subspan(i * classes, classes);
    if (static_cast<int>(argmax(row)) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

Tensor evaluate_logits(const HeadView& view, std::span<const Example> examples,
                       std::size_t crop, std::size_t chunk) {
  Rng unused(0);
  return evaluate_chunks(examples, crop, chunk, [&](const Tensor& images) {
    return head_logits(view, images, Mode::eval, unused, unused);
  });
}

Tensor evaluate_representation(const LayerStack& features, const ParamStore& params,
                               std::span<const Example> examples, std::size_t crop,
                               std::size_t chunk) {
  Rng unused(0);
  return evaluate_chunks(examples, crop, chunk, [&](const Tensor& images) {
    return flatten(features.forward(images, params, Mode::eval, unused));
  });
}

std::vector<int> predict(const HeadView& view, std::span<const Example> examples,
                         std::size_t crop) {
  const Tensor logits = evaluate_logits(view, examples, crop);
  const std::size_t classes = logits.dim(1);
  std::vector<int> out(examples.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<int>(argmax(logits.data().subspan(i * classes, classes)));
  return out;
}

double accuracy(const HeadView& view, std::span<const Example> examples, Concept which,
                std::size_t crop) {
  if (examples.empty()) throw std::invalid_argument("accuracy: empty evaluation set");
  return accuracy_from_logits(evaluate_logits(view, examples, crop), labels_of(examples, which));
}

}  // namespace agnostic
