#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "agnostic/dann.hpp"
#include "agnostic/dataset.hpp"

namespace agnostic {

// Metrics after one epoch. Row 0 describes the initialized network, before
// any update; its losses are eval-mode means over the training batches.
// Later rows hold the mean training-batch losses of that epoch.
struct EpochMetrics {
  std::size_t epoch = 0;
  double alpha = 0.0;
  double lr = 0.0;
  double loss_y = 0.0;
  double loss_p = 0.0;
  double acc_target_test = 0.0;
  double acc_context_test = 0.0;
  std::uint64_t seed = 0;
};

struct RunReport {
  std::vector<EpochMetrics> rows;
};

inline constexpr const char* kRunReportHeader =
    "epoch,alpha,lr,loss_y,loss_p,acc_target_test,acc_context_test,seed";

void write_run_report(std::ostream& out, const RunReport& report);
RunReport read_run_report(std::istream& in);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Trains the adversarial network on target_train plus context_train for
// cfg.epochs epochs. Accuracies are measured with the target head on
// target_test_iid and the protected head on context_test. Deterministic in
// cfg.seed.
RunReport train(Network& net, const Dataset& dataset, const TrainConfig& cfg,
                const EpochCallback& on_epoch = {});

// Plain supervised training of a single-head CNN on `examples`, predicting
// `which` label. Uses the same batching, augmentation and dropout streams as
// train(), so with alpha = 0 and no context examples both produce the same
// parameter trajectory. Returns the mean training loss of every epoch.
std::vector<double> train_classifier(Classifier& model, std::span<const Example> examples,
                                     Concept which, const TrainConfig& cfg);

}  // namespace agnostic
