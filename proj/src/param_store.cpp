#include "agnostic/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace agnostic {

void ParamStore::add(std::string name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  value.set_requires_grad(true);
  Tensor momentum(value.shape(), 0.0);
  entries_.push_back(Entry{std::move(name), std::move(value), std::move(momentum)});
}

void ParamStore::merge(ParamStore other) {
  for (Entry& e : other.entries_) {
    if (contains(e.name)) throw std::invalid_argument("duplicate parameter '" + e.name + "'");
    entries_.push_back(std::move(e));
  }
}

const ParamStore::Entry* ParamStore::find(std::string_view name) const {
  for (const Entry& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

bool ParamStore::contains(std::string_view name) const { return find(name) != nullptr; }

const Tensor& ParamStore::get(std::string_view name) const {
  const Entry* e = find(name);
  if (e == nullptr) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return e->value;
}

Tensor& ParamStore::get(std::string_view name) {
  return const_cast<Tensor&>(static_cast<const ParamStore&>(*this).get(name));
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const Entry& e : entries_) n += e.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (Entry& e : entries_) e.value.zero_grad();
}

ParamStore ParamStore::clone() const {
  ParamStore copy;
  for (const Entry& e : entries_) {
    Tensor value = e.value.clone();
    value.set_requires_grad(true);
    copy.entries_.push_back(Entry{e.name, std::move(value), e.momentum.clone()});
  }
  return copy;
}

ParamStore init_params(std::span<const LayerSpec> layers, const Shape& input_shape,
                       Rng& rng, std::string_view prefix) {
  ParamStore store;
  Shape shape = input_shape;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    const std::string base = std::string(prefix) + "." + std::to_string(i);
    if (layer.kind == LayerKind::conv || layer.kind == LayerKind::dense) {
      Shape w_shape;
      std::size_t outputs = 0;
      if (layer.kind == LayerKind::conv) {
        if (shape.size() != 3) {
          throw ShapeError("conv expects a CHW input, got " + shape_string(shape));
        }
        w_shape = {layer.filters, shape[0], layer.kernel, layer.kernel};
        outputs = layer.filters;
      } else {
        if (shape.size() != 1) {
          throw ShapeError("dense expects a flat input, got " + shape_string(shape));
        }
        w_shape = {shape[0], layer.width};
        outputs = layer.width;
      }
      const std::size_t fan_in = element_count(w_shape) / outputs;
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      Tensor w(w_shape);
      for (double& v : w.mutable_data()) v = rng.uniform(-bound, bound);
      store.add(base + ".w", std::move(w));
      store.add(base + ".b", Tensor(Shape{outputs}, 0.0));
    }
    shape = output_shape(layer, shape);
  }
  return store;
}

}  // namespace agnostic
