#pragma once

#include <cstdint>

#include "agnostic/layer_stack.hpp"

namespace agnostic {

// A feature extractor plus one classification head: enough to compute
// logits for a single concept.
struct HeadView {
  const LayerStack* features;
  const LayerStack* head;
  const ParamStore* params;
};

// Feature extractor G_f shared by a target head G_y and a protected head G_p.
// The protected head begins with the gradient reversal layer. Each head ends
// with a dense layer of `num_classes` outputs appended to its hidden layers.
//
// Parameter names are prefixed `features.`, `target.` and `protected.`. Each
// stack is initialized from its own stream derived from the seed, so a plain
// classifier built from the same seed starts from identical weights.
class Network {
 public:
  static Network create(const Architecture& arch, const Shape& input_shape,
                        std::size_t num_classes, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  const Shape& input_shape() const { return input_shape_; }
  std::size_t num_classes() const { return num_classes_; }
  // D, the width of the flattened representation.
  std::size_t representation_dim() const;
  // Per-example shape of the feature extractor's output, e.g. [C, h, w].
  Shape feature_map_shape() const;

  const LayerStack& features() const { return features_; }
  const LayerStack& target_head() const { return target_head_; }
  const LayerStack& protected_head() const { return protected_head_; }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // images [N, C, H, W] -> feature extractor output [N, ...]
  Tensor feature_maps(const Tensor& images, Mode mode, Rng& rng) const;
  // images -> z, [N, D]
  Tensor representation(const Tensor& images, Mode mode, Rng& rng) const;
  Tensor target_logits(const Tensor& z, Mode mode, Rng& rng) const;
  // With `skip_grl` the reversal layer is bypassed.
  Tensor protected_logits(const Tensor& z, Mode mode, Rng& rng, bool skip_grl = false) const;

  HeadView target_view() const { return {&features_, &target_head_, &params_}; }
  HeadView protected_view() const { return {&features_, &protected_head_, &params_}; }

  // Parameter-name prefixes of the three stacks.
  static constexpr const char* kFeatures = "features";
  static constexpr const char* kTarget = "target";
  static constexpr const char* kProtected = "protected";

 private:
  Architecture arch_;
  Shape input_shape_;
  std::size_t num_classes_ = 2;
  LayerStack features_;
  LayerStack target_head_;
  LayerStack protected_head_;
  ParamStore params_;
};

// A feature extractor and a single head with no adversary: the plain CNN.
class Classifier {
 public:
  static Classifier create(std::vector<LayerSpec> features, std::vector<LayerSpec> head,
                           const Shape& input_shape, std::size_t num_classes,
                           std::uint64_t seed, const char* head_name = Network::kTarget);

  const LayerStack& features() const { return features_; }
  const LayerStack& head() const { return head_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  HeadView view() const { return {&features_, &head_, &params_}; }

 private:
  LayerStack features_;
  LayerStack head_;
  ParamStore params_;
};

// Runs features then head on images, flattening in between.
Tensor head_logits(const HeadView& view, const Tensor& images, Mode mode, Rng& features_rng,
                   Rng& head_rng);

// Head layers followed by the final classification layer.
std::vector<LayerSpec> with_classifier(std::vector<LayerSpec> hidden, std::size_t num_classes);

}  // namespace agnostic
