#include "agnostic/dataset.hpp"

#include <stdexcept>

namespace agnostic {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::target_train:
      return "target_train";
    case Split::context_train:
      return "context_train";
    case Split::target_test_iid:
      return "target_test_iid";
    case Split::target_test_swapped:
      return "target_test_swapped";
    case Split::context_test:
      return "context_test";
  }
  return "";
}

std::optional<Split> parse_split(std::string_view name) {
  for (Split s : kAllSplits)
    if (split_name(s) == name) return s;
  return std::nullopt;
}

std::vector<Example>& Dataset::split(Split s) {
  return const_cast<std::vector<Example>&>(static_cast<const Dataset&>(*this).split(s));
}

const std::vector<Example>& Dataset::split(Split s) const {
  switch (s) {
    case Split::target_train:
      return target_train;
    case Split::context_train:
      return context_train;
    case Split::target_test_iid:
      return target_test_iid;
    case Split::target_test_swapped:
      return target_test_swapped;
    case Split::context_test:
      return context_test;
  }
  throw std::invalid_argument("unknown split");
}

std::size_t Dataset::total_size() const {
  std::size_t n = 0;
  for (Split s : kAllSplits) n += split(s).size();
  return n;
}

Example crop(const Example& ex, std::size_t top, std::size_t left, std::size_t size) {
  const std::size_t channels = ex.image.dim(0), h = ex.image.dim(1), w = ex.image.dim(2);
  if (size == 0 || top + size > h || left + size > w) {
    throw std::invalid_argument("crop: window " + std::to_string(size) + " at (" +
                                std::to_string(top) + ", " + std::to_string(left) +
                                ") does not fit a " + std::to_string(h) + "x" +
                                std::to_string(w) + " image");
  }
  Example out;
  out.id = ex.id;
  out.target_label = ex.target_label;
  out.protected_label = ex.protected_label;
  out.image = Tensor({channels, size, size});
  out.mask = Tensor({size, size});
  auto src = ex.image.data();
  auto dst = out.image.mutable_data();
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x)
        dst[(c * size + y) * size + x] = src[(c * h + top + y) * w + left + x];
  auto msrc = ex.mask.data();
  auto mdst = out.mask.mutable_data();
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) mdst[y * size + x] = msrc[(top + y) * w + left + x];
  return out;
}

Example flip_horizontal(const Example& ex) {
  Example out = ex;
  out.image = ex.image.clone();
  out.mask = ex.mask.clone();
  const std::size_t w = ex.image.dim(2);
  auto flip_rows = [w](std::span<double> v) {
    for (std::size_t row = 0; row < v.size() / w; ++row)
      for (std::size_t x = 0; x < w / 2; ++x) std::swap(v[row * w + x], v[row * w + w - 1 - x]);
  };
  flip_rows(out.image.mutable_data());
  flip_rows(out.mask.mutable_data());
  return out;
}

Example augment(const Example& ex, std::size_t out_size, Rng& rng) {
  const std::size_t h = ex.image.dim(1), w = ex.image.dim(2);
  if (out_size > h || out_size > w) {
    throw std::invalid_argument("augment: crop " + std::to_string(out_size) +
                                " exceeds image size " + std::to_string(h) + "x" +
                                std::to_string(w));
  }
  const std::size_t top = rng.below(h - out_size + 1);
  const std::size_t left = rng.below(w - out_size + 1);
  Example out = crop(ex, top, left, out_size);
  if (rng.bernoulli(0.5)) out = flip_horizontal(out);
  return out;
}

Example center_crop(const Example& ex, std::size_t out_size) {
  const std::size_t h = ex.image.dim(1), w = ex.image.dim(2);
  if (out_size > h || out_size > w) {
    throw std::invalid_argument("center_crop: crop " + std::to_string(out_size) +
                                " exceeds image size " + std::to_string(h) + "x" +
                                std::to_string(w));
  }
  if (out_size == h && out_size == w) return ex;
  return crop(ex, (h - out_size) / 2, (w - out_size) / 2, out_size);
}

int label_of(const Example& ex, Concept which) {
  if (which == Concept::protected_concept) return ex.protected_label;
  if (!ex.target_label) {
    throw std::invalid_argument("example " + ex.id + " has no target label");
  }
  return *ex.target_label;
}

std::vector<int> labels_of(std::span<const Example> examples, Concept which) {
  std::vector<int> labels;
  labels.reserve(examples.size());
  for (const Example& ex : examples) labels.push_back(label_of(ex, which));
  return labels;
}

}  // namespace agnostic
