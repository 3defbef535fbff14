#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "agnostic/dataset.hpp"
#include "agnostic/layer_spec.hpp"
#include "agnostic/network.hpp"

namespace agnostic {

struct ProbeConfig {
  std::size_t epochs = 30;
  double lr = 0.001;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1009;
};

// Trains a fresh classifier with the given hidden layers (plus a final dense
// layer of `num_classes`) on fixed representations and returns its accuracy
// on the held-out representations. Inputs are [N, D].
double probe_representation(const Tensor& train_z, std::span<const int> train_labels,
                            const Tensor& test_z, std::span<const int> test_labels,
                            std::vector<LayerSpec> hidden, std::size_t num_classes,
                            const ProbeConfig& cfg);

// Hidden layers of the protected head without its reversal layer.
std::vector<LayerSpec> probe_layers(const Architecture& arch);

// Freezes the network's feature extractor, fits a capacity-matched probe on
// z of context_train to predict the protected label, and returns its
// accuracy on context_test. Near chance means nothing about the protected
// concept can be read off the representation by this probe.
double probe_agnosticism(const Network& net, const Dataset& dataset, std::size_t crop,
                         const ProbeConfig& cfg);

}  // namespace agnostic
