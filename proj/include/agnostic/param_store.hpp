#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agnostic/layer_spec.hpp"
#include "agnostic/random.hpp"
#include "agnostic/tensor.hpp"

namespace agnostic {

// Named trainable tensors, each paired with a zero-initialized momentum
// buffer of the same shape. Iteration order is insertion order.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor momentum;
  };

  // The tensor is marked as requiring a gradient.
  void add(std::string name, Tensor value);
  // Appends every entry of `other`; names must not collide.
  void merge(ParamStore other);

  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);

  std::span<Entry> entries() { return entries_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t parameter_count() const;

  void zero_grad();
  // Deep copy: values and momentum buffers do not share storage with *this.
  ParamStore clone() const;

 private:
  const Entry* find(std::string_view name) const;
  std::vector<Entry> entries_;
};

// Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)); biases zero. Names are
// `<prefix>.<layer index>.w` and `<prefix>.<layer index>.b`.
ParamStore init_params(std::span<const LayerSpec> layers, const Shape& input_shape,
                       Rng& rng, std::string_view prefix);

}  // namespace agnostic
