#include "agnostic/layer_stack.hpp"

#include "agnostic/tensor_ops.hpp"

namespace agnostic {

LayerStack::LayerStack(std::string name, std::vector<LayerSpec> layers)
    : name_(std::move(name)), layers_(std::move(layers)) {}

Shape LayerStack::output_shape(const Shape& input) const {
  return agnostic::output_shape(layers_, input);
}

ParamStore LayerStack::init_params(const Shape& input, Rng& rng) const {
  return agnostic::init_params(layers_, input, rng, name_);
}

Tensor LayerStack::forward(const Tensor& x, const ParamStore& params, Mode mode, Rng& rng,
                           bool skip_grl) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& layer = layers_[i];
    switch (layer.kind) {
      case LayerKind::conv:
      case LayerKind::dense: {
        const std::string base = name_ + "." + std::to_string(i);
        const Tensor& w = params.get(base + ".w");
        const Tensor& b = params.get(base + ".b");
        h = layer.kind == LayerKind::conv ? conv2d(h, w, b) : dense(h, w, b);
        break;
      }
      case LayerKind::maxpool:
        h = maxpool2d(h);
        break;
      case LayerKind::relu:
        h = relu(h);
        break;
      case LayerKind::leaky_relu:
        h = leaky_relu(h, layer.slope);
        break;
      case LayerKind::tanh:
        h = tanh(h);
        break;
      case LayerKind::dropout:
        h = dropout(h, layer.rate, mode, rng);
        break;
      case LayerKind::flatten:
        h = flatten(h);
        break;
      case LayerKind::grl:
        if (!skip_grl) h = grl(h);
        break;
    }
  }
  return h;
}

}  // namespace agnostic
