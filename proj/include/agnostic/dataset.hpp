#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agnostic/random.hpp"
#include "agnostic/tensor.hpp"

namespace agnostic {

// One image. Target examples carry the shape class and a mask of the shape's
// pixels; context-only examples have no target label and, unless the dataset
// draws distractor shapes on them, an all-zero mask.
struct Example {
  std::string id;
  Tensor image;  // [C, H, W], values in [0, 1]
  std::optional<int> target_label;
  int protected_label = 0;
  Tensor mask;  // [H, W], 1 on object pixels
};

enum class Split { target_train, context_train, target_test_iid, target_test_swapped, context_test };

inline constexpr std::array<Split, 5> kAllSplits = {
    Split::target_train, Split::context_train, Split::target_test_iid,
    Split::target_test_swapped, Split::context_test};

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view name);

struct Dataset {
  std::vector<Example> target_train;
  std::vector<Example> context_train;
  std::vector<Example> target_test_iid;
  std::vector<Example> target_test_swapped;
  std::vector<Example> context_test;

  std::vector<Example>& split(Split s);
  const std::vector<Example>& split(Split s) const;
  std::size_t total_size() const;
  bool empty() const { return total_size() == 0; }
};

// Parameters of the synthetic confounded dataset. Shape class 0 is a filled
// disc and class 1 a filled square of equal area; background class 0 is
// horizontal stripes and class 1 a checkerboard.
struct DatasetSpec {
  std::size_t n_target_per_class = 500;
  std::size_t n_context_per_class = 1000;
  std::size_t n_test_per_class = 100;
  // Fraction of shape-class-c training images drawn on background c.
  double correlation = 1.0;
  std::size_t image_size = 40;
  // Training crop. Shapes are placed so that every crop contains them whole.
  std::size_t crop_size = 32;
  double noise_level = 0.05;
  double min_radius = 4.0;
  double max_radius = 7.0;
  std::uint64_t seed = 7;
  // Draw an unlabelled shape on every context image too, half of each class
  // per background, so shape carries no information about the background.
  bool context_shapes = false;
};

// Crops a size x size window with top-left corner (top, left).
Example crop(const Example& ex, std::size_t top, std::size_t left, std::size_t size);
Example flip_horizontal(const Example& ex);
// Random out_size crop plus a horizontal flip with probability 1/2, applied
// identically to image and mask.
Example augment(const Example& ex, std::size_t out_size, Rng& rng);
// The deterministic evaluation view: the centred out_size crop.
Example center_crop(const Example& ex, std::size_t out_size);

// Which label of an example a classifier predicts.
enum class Concept { target, protected_concept };

// Throws std::invalid_argument for Concept::target on a context-only example.
int label_of(const Example& ex, Concept which);
std::vector<int> labels_of(std::span<const Example> examples, Concept which);

}  // namespace agnostic
