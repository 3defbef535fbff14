#pragma once

#include "agnostic/dann.hpp"
#include "agnostic/dataset.hpp"

namespace agnostic {

// Accuracies of two independently trained plain CNNs, each evaluated on both
// hold-out sets. "on_context" for the target model scores its shape
// prediction against the background label of context-only images, and
// vice versa.
struct CrossDomainTable {
  double target_model_on_target = 0.0;
  double target_model_on_context = 0.0;
  double context_model_on_context = 0.0;
  double context_model_on_target = 0.0;
};

// Both models use the feature extractor and the target head's hidden layers
// of `arch` (no reversal layer, nothing shared). The target model trains on
// target_train with cfg.seed, the context model on context_train with
// cfg.seed + 1.
CrossDomainTable cross_domain_eval(const Dataset& dataset, const Architecture& arch,
                                   const TrainConfig& cfg);

}  // namespace agnostic
