#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agnostic/tensor.hpp"

namespace agnostic {

enum class LayerKind { conv, maxpool, relu, leaky_relu, tanh, dense, dropout, flatten, grl };

// One entry of an architecture description. Convolutions are stride 1 with
// same padding; pooling is a 2x2 window with stride 2.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t filters = 0;  // conv
  std::size_t kernel = 0;   // conv, odd
  std::size_t width = 0;    // dense
  double rate = 0.0;        // dropout, in [0, 1)
  double slope = 0.0;       // leaky_relu, in (0, 1)

  static LayerSpec conv(std::size_t filters, std::size_t kernel);
  static LayerSpec maxpool() { return {LayerKind::maxpool}; }
  static LayerSpec relu() { return {LayerKind::relu}; }
  static LayerSpec leaky_relu(double slope);
  static LayerSpec tanh() { return {LayerKind::tanh}; }
  static LayerSpec dense(std::size_t width);
  static LayerSpec dropout(double rate);
  static LayerSpec flatten() { return {LayerKind::flatten}; }
  static LayerSpec grl() { return {LayerKind::grl}; }

  bool has_params() const { return kind == LayerKind::conv || kind == LayerKind::dense; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Malformed architecture text. The message names the line.
class ArchitectureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `conv 8 3`, `maxpool`, `relu`, `leaky_relu 0.1`, `tanh`, `dense 64`, `dropout 0.5`, `flatten`, `grl`
std::string to_string(const LayerSpec& layer);
LayerSpec parse_layer(std::string_view line);

// Output shape of one layer for a single example (no batch extent).
Shape output_shape(const LayerSpec& layer, const Shape& input);
Shape output_shape(std::span<const LayerSpec> layers, const Shape& input);

// The three layer stacks of an adversarial network, as read from an
// architecture file:
//
//   [features]
//   conv 8 3
//   relu
//   maxpool
//   [target]
//   dense 32
//   relu
//   dropout 0.5
//   [protected]
//   grl
//   dense 32
//   ...
//
// Heads list their hidden layers only; a final dense layer with one output
// per class is appended when the network is built. `#` starts a comment.
struct Architecture {
  std::vector<LayerSpec> features;
  std::vector<LayerSpec> target_head;
  std::vector<LayerSpec> protected_head;

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

Architecture parse_architecture(std::string_view text);
std::string to_string(const Architecture& arch);

// Checks the structural rules: one gradient reversal layer, at the entry of
// the protected head, and none elsewhere.
void validate(const Architecture& arch);

// The scaled-down default used by the CLI and the experiments.
Architecture default_architecture();

}  // namespace agnostic
