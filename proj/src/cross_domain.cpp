#include "agnostic/cross_domain.hpp"

#include <stdexcept>

#include "agnostic/metrics.hpp"
#include "agnostic/trainer.hpp"

namespace agnostic {

CrossDomainTable cross_domain_eval(const Dataset& dataset, const Architecture& arch,
                                   const TrainConfig& cfg) {
  if (dataset.target_train.empty() || dataset.context_train.empty()) {
    throw std::invalid_argument("cross-domain: needs both target and context training data");
  }
  const Shape input{dataset.target_train.front().image.dim(0), cfg.crop, cfg.crop};
  CrossDomainTable table;

  Classifier target_model = Classifier::create(arch.features, arch.target_head, input, 2, cfg.seed);
  train_classifier(target_model, dataset.target_train, Concept::target, cfg);
  table.target_model_on_target =
      accuracy(target_model.view(), dataset.target_test_iid, Concept::target, cfg.crop);
  table.target_model_on_context =
      accuracy(target_model.view(), dataset.context_test, Concept::protected_concept, cfg.crop);

  TrainConfig context_cfg = cfg;
  context_cfg.seed = cfg.seed + 1;
  Classifier context_model =
      Classifier::create(arch.features, arch.target_head, input, 2, context_cfg.seed);
  train_classifier(context_model, dataset.context_train, Concept::protected_concept, context_cfg);
  table.context_model_on_context = accuracy(context_model.view(), dataset.context_test,
                                            Concept::protected_concept, cfg.crop);
  table.context_model_on_target =
      accuracy(context_model.view(), dataset.target_test_iid, Concept::target, cfg.crop);
  return table;
}

}  // namespace agnostic
