#pragma once

#include <cstdint>
#include <span>

#include "agnostic/batching.hpp"
#include "agnostic/network.hpp"

namespace agnostic {

// What the protected head descends.
//  objective: the backpropagated scalar is (1-a) L_y + a L_p, so theta_p
//             sees a * dL_p and stands still at a = 0.
//  own_loss:  theta_p always descends the full L_p; the reversed gradient
//             into theta_f is still weighted by a. theta_f and theta_y get
//             the same gradients as under `objective`.
enum class HeadUpdate { objective, own_loss };

// Hyper-parameters of one training run. Defaults are the first experiment's
// settings (batch 32, eta 0.01 decayed 10x every 3 epochs, momentum 0.5,
// weight decay 5e-4, 10 epochs).
struct TrainConfig {
  double alpha_max = 0.0;
  // Epochs over which alpha ramps linearly from 0 to alpha_max; 0 = constant.
  std::size_t alpha_ramp_epochs = 0;
  double base_lr = 0.01;
  // 0 disables decay.
  std::size_t lr_decay_every = 3;
  double lr_decay_factor = 10.0;
  double momentum = 0.5;
  double weight_decay = 5e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 7;
  // Side of the square training crop.
  std::size_t crop = 32;
  HeadUpdate head_update = HeadUpdate::own_loss;

  // Adversarial run defaults: identical except eta = 0.001.
  static TrainConfig adversarial();

  // Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

// min(alpha_max, alpha_max * epoch / alpha_ramp_epochs); alpha_max when the
// ramp length is 0.
double alpha_at_epoch(std::size_t epoch, const TrainConfig& cfg);

// base_lr * factor^(-floor(epoch / lr_decay_every))
double lr_at_epoch(std::size_t epoch, const TrainConfig& cfg);

// The weighted two-loss objective
//   E = (1 - alpha) mean(y) - alpha (mean(p_target) + mean(p_context)),
// where an empty p_context contributes 0. Throws on empty y_losses.
double dann_objective(std::span<const double> y_losses, std::span<const double> p_losses_target,
                      std::span<const double> p_losses_context, double alpha);

// How the sign flip into the feature extractor is realized.
//  layer:        protected logits pass through the reversal layer and the
//                backpropagated scalar is (1-a) L_y + a L_p.
//  negated_loss: the reversal layer is bypassed and the scalar is
//                (1-a) L_y - a L_p. Gives the same feature-extractor
//                gradient; the protected head then ascends its loss, so it is
//                only used for checking.
enum class Reversal { layer, negated_loss };

// Independent dropout streams per layer stack.
struct TrainingStreams {
  explicit TrainingStreams(std::uint64_t seed);
  Rng features;
  Rng target;
  Rng protected_head;
};

struct DannLoss {
  Tensor total;          // the scalar to backpropagate
  double loss_y = 0.0;   // mean target loss over labelled rows (0 if none)
  double loss_p = 0.0;   // mean protected loss on target rows + on context rows
  double objective = 0.0;  // E evaluated on this batch
};

// Forward pass of the adversarial network over a batch. L_y averages over
// rows with a target label; L_p is the mean protected loss over those rows
// plus the mean over context-only rows. Throws when the batch has no target
// rows and alpha < 1.
DannLoss dann_loss(const Network& net, const LabeledBatch& batch, double alpha, Mode mode,
                   TrainingStreams& streams, Reversal reversal = Reversal::layer,
                   HeadUpdate update = HeadUpdate::objective);

// Heavy-ball update of every parameter with gradient g (0 when absent):
//   v <- momentum v - lr (g + weight_decay theta);  theta <- theta + v
void sgd_momentum_step(ParamStore& params, double lr, double momentum, double weight_decay);

struct StepResult {
  double alpha = 0.0;
  double lr = 0.0;
  double loss_y = 0.0;
  double loss_p = 0.0;
  double objective = 0.0;
};

// One saddle-point update with alpha and lr taken from the schedules at
// `epoch`. theta_y and theta_p descend their own losses; theta_f descends
// (1 - alpha) L_y - alpha L_p through the reversal layer.
StepResult saddle_sgd_step(Network& net, const LabeledBatch& batch, const TrainConfig& cfg,
                           std::size_t epoch, TrainingStreams& streams);

}  // namespace agnostic
