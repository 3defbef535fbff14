#include "agnostic/network.hpp"

#include "agnostic/tensor_ops.hpp"

namespace agnostic {
namespace {

ParamStore init_stack(const LayerStack& stack, const Shape& input, std::uint64_t seed) {
  Rng rng(derive_seed(seed, std::string("init-") + stack.name()));
  return stack.init_params(input, rng);
}

}  // namespace

std::vector<LayerSpec> with_classifier(std::vector<LayerSpec> hidden, std::size_t num_classes) {
  hidden.push_back(LayerSpec::dense(num_classes));
  return hidden;
}

Network Network::create(const Architecture& arch, const Shape& input_shape,
                        std::size_t num_classes, std::uint64_t seed) {
  validate(arch);
  Network net;
  net.arch_ = arch;
  net.input_shape_ = input_shape;
  net.num_classes_ = num_classes;
  net.features_ = LayerStack(kFeatures, arch.features);
  net.target_head_ = LayerStack(kTarget, with_classifier(arch.target_head, num_classes));
  net.protected_head_ = LayerStack(kProtected, with_classifier(arch.protected_head, num_classes));

  const Shape z_shape{element_count(net.features_.output_shape(input_shape))};
  net.params_ = init_stack(net.features_, input_shape, seed);
  net.params_.merge(init_stack(net.target_head_, z_shape, seed));
  net.params_.merge(init_stack(net.protected_head_, z_shape, seed));
  return net;
}

std::size_t Network::representation_dim() const {
  return element_count(features_.output_shape(input_shape_));
}

Shape Network::feature_map_shape() const { return features_.output_shape(input_shape_); }

Tensor Network::feature_maps(const Tensor& images, Mode mode, Rng& rng) const {
  return features_.forward(images, params_, mode, rng);
}

Tensor Network::representation(const Tensor& images, Mode mode, Rng& rng) const {
  return flatten(feature_maps(images, mode, rng));
}

Tensor Network::target_logits(const Tensor& z, Mode mode, Rng& rng) const {
  return target_head_.forward(z, params_, mode, rng);
}

Tensor Network::protected_logits(const Tensor& z, Mode mode, Rng& rng, bool skip_grl) const {
  return protected_head_.forward(z, params_, mode, rng, skip_grl);
}

Classifier Classifier::create(std::vector<LayerSpec> features, std::vector<LayerSpec> head,
                              const Shape& input_shape, std::size_t num_classes,
                              std::uint64_t seed, const char* head_name) {
  Classifier c;
  c.features_ = LayerStack(Network::kFeatures, std::move(features));
  c.head_ = LayerStack(head_name, with_classifier(std::move(head), num_classes));
  const Shape z_shape{element_count(c.features_.output_shape(input_shape))};
  c.params_ = init_stack(c.features_, input_shape, seed);
  c.params_.merge(init_stack(c.head_, z_shape, seed));
  return c;
}

Tensor head_logits(const HeadView& view, const Tensor& images, Mode mode, Rng& features_rng,
                   Rng& head_rng) {
  Tensor z = flatten(view.features->forward(images, *view.params, mode, features_rng));
  return view.head->forward(z, *view.params, mode, head_rng);
}

}  // namespace agnostic
