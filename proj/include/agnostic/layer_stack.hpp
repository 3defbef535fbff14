#pragma once

#include <span>
#include <string>
#include <vector>

#include "agnostic/layer_spec.hpp"
#include "agnostic/layers.hpp"
#include "agnostic/param_store.hpp"

namespace agnostic {

// An ordered list of layers whose parameters live in a ParamStore under
// `<name>.<layer index>.{w,b}`.
class LayerStack {
 public:
  LayerStack() = default;
  LayerStack(std::string name, std::vector<LayerSpec> layers);

  const std::string& name() const { return name_; }
  std::span<const LayerSpec> layers() const { return layers_; }

  // Per-example output shape.
  Shape output_shape(const Shape& input) const;

  ParamStore init_params(const Shape& input, Rng& rng) const;

  // x carries a leading batch extent. `rng` drives dropout in train mode.
  // Layers of kind `grl` are skipped when `skip_grl` is set.
  Tensor forward(const Tensor& x, const ParamStore& params, Mode mode, Rng& rng,
                 bool skip_grl = false) const;

 private:
  std::string name_;
  std::vector<LayerSpec> layers_;
};

}  // namespace agnostic
