#include "agnostic/dann.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "agnostic/tensor_ops.hpp"

namespace agnostic {
namespace {

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<int> pick(std::span<const int> labels, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels[r]);
  return out;
}

}  // namespace

TrainConfig TrainConfig::adversarial() {
  TrainConfig cfg;
  cfg.base_lr = 0.001;
  return cfg;
}

void TrainConfig::validate() const {
  if (!(alpha_max >= 0.0 && alpha_max <= 1.0)) {
    throw std::invalid_argument("alpha_max must be in [0, 1], got " + std::to_string(alpha_max));
  }
  if (!(base_lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(lr_decay_factor > 0.0)) throw std::invalid_argument("lr decay factor must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("momentum must be in [0, 1)");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("weight decay must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (crop == 0) throw std::invalid_argument("crop must be positive");
}

double alpha_at_epoch(std::size_t epoch, const TrainConfig& cfg) {
  if (cfg.alpha_ramp_epochs == 0 || epoch >= cfg.alpha_ramp_epochs) return cfg.alpha_max;
  return cfg.alpha_max * static_cast<double>(epoch) / static_cast<double>(cfg.alpha_ramp_epochs);
}

double lr_at_epoch(std::size_t epoch, const TrainConfig& cfg) {
  if (cfg.lr_decay_every == 0) return cfg.base_lr;
  const auto steps = static_cast<double>(epoch / cfg.lr_decay_every);
  return cfg.base_lr * std::pow(cfg.lr_decay_factor, -steps);
}

double dann_objective(std::span<const double> y_losses, std::span<const double> p_losses_target,
                      std::span<const double> p_losses_context, double alpha) {
  if (y_losses.empty()) throw std::invalid_argument("dann_objective: no target losses");
  return (1.0 - alpha) * mean_of(y_losses) -
         alpha * (mean_of(p_losses_target) + mean_of(p_losses_context));
}

TrainingStreams::TrainingStreams(std::uint64_t seed)
    : features(derive_seed(seed, "dropout-features")),
      target(derive_seed(seed, "dropout-target")),
      protected_head(derive_seed(seed, "dropout-protected")) {}

DannLoss dann_loss(const Network& net, const LabeledBatch& batch, double alpha, Mode mode,
                   TrainingStreams& streams, Reversal reversal, HeadUpdate update) {
  const auto target_rows = batch.target_rows();
  const auto context_rows = batch.context_rows();
  if (target_rows.empty() && alpha < 1.0) {
    throw std::invalid_argument(
        "dann_loss: batch has no target-labelled examples, target loss is undefined");
  }

  const Tensor z = net.representation(batch.images, mode, streams.features);

  DannLoss out;
  Tensor loss_y;
  if (!target_rows.empty()) {
    const Tensor logits_y = net.target_logits(gather_rows(z, target_rows), mode, streams.target);
    loss_y = softmax_cross_entropy(logits_y, batch.present_target_labels());
    out.loss_y = loss_y.item();
  }

  const bool skip_grl = reversal == Reversal::negated_loss;
  const bool own_loss = update == HeadUpdate::own_loss;
  // Under own_loss the alpha weight moves from the loss onto the gradient
  // entering the protected branch, which leaves theta_p at full weight.
  const Tensor z_p = own_loss ? scale_grad(z, skip_grl ? -alpha : alpha) : z;
  const Tensor logits_p = net.protected_logits(z_p, mode, streams.protected_head, skip_grl);
  Tensor loss_p;
  bool have_p = false;
  for (const auto* rows : {&target_rows, &context_rows}) {
    if (rows->empty()) continue;
    Tensor part = softmax_cross_entropy(gather_rows(logits_p, *rows),
                                        pick(batch.protected_labels, *rows));
    loss_p = have_p ? add(loss_p, part) : part;
    have_p = true;
  }
  out.loss_p = have_p ? loss_p.item() : 0.0;
  out.objective = (1.0 - alpha) * out.loss_y - alpha * out.loss_p;

  double p_weight = reversal == Reversal::layer ? alpha : -alpha;
  if (own_loss) p_weight = 1.0;
  if (target_rows.empty()) {
    out.total = scale(loss_p, p_weight);
  } else {
    out.total = add(scale(loss_y, 1.0 - alpha), scale(loss_p, p_weight));
  }
  return out;
}

void sgd_momentum_step(ParamStore& params, double lr, double momentum, double weight_decay) {
  for (auto& entry : params.entries()) {
    auto theta = entry.value.mutable_data();
    auto velocity = entry.momentum.mutable_data();
    const auto grad = entry.value.grad();
    const bool has_grad = !grad.empty();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = has_grad ? grad[i] : 0.0;
      velocity[i] = momentum * velocity[i] - lr * (g + weight_decay * theta[i]);
      theta[i] += velocity[i];
    }
  }
}

StepResult saddle_sgd_step(Network& net, const LabeledBatch& batch, const TrainConfig& cfg,
                           std::size_t epoch, TrainingStreams& streams) {
  StepResult result;
  result.alpha = alpha_at_epoch(epoch, cfg);
  result.lr = lr_at_epoch(epoch, cfg);
  {
    Tape tape;
    const DannLoss loss = dann_loss(net, batch, result.alpha, Mode::train, streams,
                                    Reversal::layer, cfg.head_update);
    net.params().zero_grad();
    tape.backward(loss.total);
    result.loss_y = loss.loss_y;
    result.loss_p = loss.loss_p;
    result.objective = loss.objective;
  }
  sgd_momentum_step(net.params(), result.lr, cfg.momentum, cfg.weight_decay);
  return result;
}

}  // namespace agnostic
