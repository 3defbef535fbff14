#include "agnostic/probe.hpp"

#include <stdexcept>

#include "agnostic/batching.hpp"
#include "agnostic/dann.hpp"
#include "agnostic/layer_stack.hpp"
#include "agnostic/layers.hpp"
#include "agnostic/metrics.hpp"
#include "agnostic/tensor_ops.hpp"

namespace agnostic {

std::vector<LayerSpec> probe_layers(const Architecture& arch) {
  std::vector<LayerSpec> layers;
  for (const LayerSpec& layer : arch.protected_head)
    if (layer.kind != LayerKind::grl) layers.push_back(layer);
  return layers;
}

double probe_representation(const Tensor& train_z, std::span<const int> train_labels,
                            const Tensor& test_z, std::span<const int> test_labels,
                            std::vector<LayerSpec> hidden, std::size_t num_classes,
                            const ProbeConfig& cfg) {
  if (train_z.rank() != 2 || test_z.rank() != 2 || train_z.dim(1) != test_z.dim(1) ||
      train_z.dim(0) != train_labels.size() || test_z.dim(0) != test_labels.size()) {
    throw ShapeError("probe: representations " + shape_string(train_z.shape()) + " / " +
                     shape_string(test_z.shape()) + " do not match the labels");
  }
  if (cfg.batch_size == 0) throw std::invalid_argument("probe: batch size must be positive");
  const LayerStack head("probe", with_classifier(std::move(hidden), num_classes));
  Rng init_rng(derive_seed(cfg.seed, "init-probe"));
  ParamStore params = head.init_params({train_z.dim(1)}, init_rng);
  Rng dropout_rng(derive_seed(cfg.seed, "dropout-probe"));

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const BatchPlan& plan : plan_batches(train_z.dim(0), 0, cfg.batch_size, cfg.seed, epoch)) {
      const Tensor x = gather_rows(train_z, plan.target);
      std::vector<int> labels;
      for (std::size_t i : plan.target) labels.push_back(train_labels[i]);
      {
        Tape tape;
        const Tensor loss =
            softmax_cross_entropy(head.forward(x, params, Mode::train, dropout_rng), labels);
        params.zero_grad();
        tape.backward(loss);
      }
      sgd_momentum_step(params, cfg.lr, cfg.momentum, cfg.weight_decay);
    }
  }
  Rng unused(0);
  return accuracy_from_logits(head.forward(test_z, params, Mode::eval, unused), test_labels);
}

double probe_agnosticism(const Network& net, const Dataset& dataset, std::size_t crop,
                         const ProbeConfig& cfg) {
  const Tensor train_z =
      evaluate_representation(net.features(), net.params(), dataset.context_train, crop);
  const Tensor test_z =
      evaluate_representation(net.features(), net.params(), dataset.context_test, crop);
  return probe_representation(train_z, labels_of(dataset.context_train, Concept::protected_concept),
                              test_z, labels_of(dataset.context_test, Concept::protected_concept),
                              probe_layers(net.architecture()), net.num_classes(), cfg);
}

}  // namespace agnostic
