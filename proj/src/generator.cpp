#include "agnostic/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace agnostic {
namespace {

constexpr double kBackgroundLow = 0.15;
constexpr double kBackgroundHigh = 0.45;
constexpr double kShapeValue = 0.9;

// Half-period of the stripes / cell size of the checkerboard, in pixels.
std::size_t texture_period(Rng& rng) { return 2 + rng.below(2); }

void paint_background(std::span<double> pixels, std::size_t size, int background,
                      Rng& rng) {
  const std::size_t period = texture_period(rng);
  const std::size_t phase_y = rng.below(2 * period);
  const std::size_t phase_x = rng.below(2 * period);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      std::size_t parity = (y + phase_y) / period;
      if (background == 1) parity += (x + phase_x) / period;
      pixels[y * size + x] = parity % 2 == 0 ? kBackgroundLow : kBackgroundHigh;
    }
  }
}

void add_noise(std::span<double> pixels, double level, Rng& rng) {
  for (double& v : pixels) {
    v += level * (2.0 * rng.uniform() - 1.0);
    v = std::clamp(v, 0.0, 1.0);
  }
}

struct Placement {
  double lo, hi;
};

Placement shape_placement(const DatasetSpec& spec) {
  if (spec.crop_size == 0 || spec.crop_size > spec.image_size) {
    throw std::invalid_argument("crop size " + std::to_string(spec.crop_size) +
                                " must be in [1, image size " +
                                std::to_string(spec.image_size) + "]");
  }
  if (!(spec.min_radius > 0.0 && spec.min_radius <= spec.max_radius)) {
    throw std::invalid_argument("shape radius range must satisfy 0 < min <= max");
  }
  // Every crop offset lies in [0, margin], so the region visible in all
  // crops is [margin, image_size - margin).
  const double margin = static_cast<double>(spec.image_size - spec.crop_size);
  const double lo = margin + spec.max_radius;
  const double hi = static_cast<double>(spec.image_size) - margin - spec.max_radius;
  if (lo > hi) {
    throw std::invalid_argument("shape of radius " + std::to_string(spec.max_radius) +
                                " does not fit a " + std::to_string(spec.image_size) +
                                " px image with " + std::to_string(spec.crop_size) +
                                " px crops");
  }
  return {lo, hi};
}

// Draws `shape` (none when empty); `target_label` is what the example reports.
Example make_example(const DatasetSpec& spec, const Placement& place, std::optional<int> shape,
                     std::optional<int> target_label, int background, Rng& rng) {
  const std::size_t s = spec.image_size;
  Example ex;
  ex.image = Tensor({1, s, s});
  ex.target_label = target_label;
  ex.protected_label = background;
  auto pixels = ex.image.mutable_data();
  paint_background(pixels, s, background, rng);
  if (!shape) {
    ex.mask = Tensor({s, s}, 0.0);
    add_noise(pixels, spec.noise_level, rng);
    return ex;
  }
  const double radius = rng.uniform(spec.min_radius, spec.max_radius);
  const double cx = rng.uniform(place.lo, place.hi);
  const double cy = rng.uniform(place.lo, place.hi);
  // Equal-area square, so size alone does not separate the classes.
  ex.mask = *shape == 0 ? disc_mask(s, cx, cy, radius)
                       : square_mask(s, cx, cy, radius * std::sqrt(std::numbers::pi) / 2.0);
  auto mask = ex.mask.data();
  for (std::size_t i = 0; i < pixels.size(); ++i)
    if (mask[i] > 0.0) pixels[i] = kShapeValue;
  add_noise(pixels, spec.noise_level, rng);
  return ex;
}

// Emits n examples of each shape class, `matched` of which sit on the
// background with the same index as the shape.
std::vector<Example> target_split(const DatasetSpec& spec, const Placement& place,
                                  std::size_t n, double match_fraction, Split split) {
  Rng rng(derive_seed(spec.seed, split_name(split)));
  const auto matched = static_cast<std::size_t>(std::llround(match_fraction * static_cast<double>(n)));
  std::vector<Example> out;
  out.reserve(2 * n);
  for (int shape = 0; shape < 2; ++shape) {
    for (std::size_t i = 0; i < n; ++i) {
      const int background = i < matched ? shape : 1 - shape;
      out.push_back(make_example(spec, place, shape, shape, background, rng));
    }
  }
  return out;
}

std::vector<Example> context_split(const DatasetSpec& spec, const Placement& place,
                                   std::size_t n, Split split) {
  Rng rng(derive_seed(spec.seed, split_name(split)));
  std::vector<Example> out;
  out.reserve(2 * n);
  for (int background = 0; background < 2; ++background) {
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<int> shape;
      if (spec.context_shapes) shape = 2 * i < n ? 0 : 1;
      out.push_back(make_example(spec, place, shape, std::nullopt, background, rng));
    }
  }
  return out;
}

void shuffle_and_name(std::vector<Example>& examples, Split split, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "order", static_cast<std::uint64_t>(split)));
  for (std::size_t i = examples.size(); i > 1; --i) std::swap(examples[i - 1], examples[rng.below(i)]);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "%05zu", i);
    examples[i].id = std::string(split_name(split)) + "_" + buffer;
  }
}

}  // namespace

Tensor disc_mask(std::size_t size, double cx, double cy, double radius) {
  Tensor mask({size, size});
  auto m = mask.mutable_data();
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double dx = static_cast<double>(x) + 0.5 - cx;
      const double dy = static_cast<double>(y) + 0.5 - cy;
      m[y * size + x] = dx * dx + dy * dy <= radius * radius ? 1.0 : 0.0;
    }
  }
  return mask;
}

Tensor square_mask(std::size_t size, double cx, double cy, double half_side) {
  Tensor mask({size, size});
  auto m = mask.mutable_data();
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double dx = std::abs(static_cast<double>(x) + 0.5 - cx);
      const double dy = std::abs(static_cast<double>(y) + 0.5 - cy);
      m[y * size + x] = dx <= half_side && dy <= half_side ? 1.0 : 0.0;
    }
  }
  return mask;
}

Dataset generate(const DatasetSpec& spec) {
  if (!(spec.correlation >= 0.0 && spec.correlation <= 1.0)) {
    throw std::invalid_argument("correlation must be in [0, 1]");
  }
  if (spec.noise_level < 0.0) throw std::invalid_argument("noise level must be >= 0");
  const Placement place = shape_placement(spec);
  Dataset d;
  d.target_train = target_split(spec, place, spec.n_target_per_class, spec.correlation,
                                Split::target_train);
  d.context_train = context_split(spec, place, spec.n_context_per_class, Split::context_train);
  d.target_test_iid = target_split(spec, place, spec.n_test_per_class, spec.correlation,
                                   Split::target_test_iid);
  d.target_test_swapped = target_split(spec, place, spec.n_test_per_class,
                                       1.0 - spec.correlation, Split::target_test_swapped);
  d.context_test = context_split(spec, place, spec.n_test_per_class, Split::context_test);
  for (Split s : kAllSplits) shuffle_and_name(d.split(s), s, spec.seed);
  return d;
}

}  // namespace agnostic
