#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "agnostic/dann.hpp"
#include "agnostic/generator.hpp"
#include "agnostic/gradcheck.hpp"
#include "agnostic/layers.hpp"
#include "agnostic/trainer.hpp"

using namespace agnostic;

namespace {

Architecture toy_architecture() {
  return parse_architecture(R"(
[features]
conv 2 3
relu
maxpool
[target]
dense 3
relu
dropout 0.3
[protected]
grl
dense 3
relu
dropout 0.3
)");
}

// Three target rows and two context-only rows of random 1x4x4 images.
LabeledBatch toy_batch(Rng& rng, std::size_t n_target = 3, std::size_t n_context = 2) {
  LabeledBatch batch;
  const std::size_t n = n_target + n_context;
  batch.images = Tensor({n, 1, 4, 4});
  for (double& v : batch.images.mutable_data()) v = rng.uniform();
  for (std::size_t i = 0; i < n; ++i) {
    batch.target_labels.push_back(i < n_target ? std::optional<int>(static_cast<int>(rng.below(2)))
                                               : std::nullopt);
    batch.protected_labels.push_back(static_cast<int>(rng.below(2)));
  }
  return batch;
}

// E evaluated through the network with the dropout masks fixed by `seed`.
double objective_at(const Network& net, const LabeledBatch& batch, double alpha) {
  TrainingStreams streams(99);
  return dann_loss(net, batch, alpha, Mode::train, streams).objective;
}

struct Gradients {
  std::vector<std::vector<double>> per_param;
};

Gradients backward_grads(Network& net, const LabeledBatch& batch, double alpha,
                         Reversal reversal = Reversal::layer,
                         HeadUpdate update = HeadUpdate::objective) {
  TrainingStreams streams(99);
  net.params().zero_grad();
  {
    Tape tape;
    const DannLoss loss = dann_loss(net, batch, alpha, Mode::train, streams, reversal, update);
    tape.backward(loss.total);
  }
  Gradients g;
  for (const auto& e : net.params().entries()) {
    g.per_param.emplace_back(e.value.grad().begin(), e.value.grad().end());
    if (g.per_param.back().empty()) g.per_param.back().assign(e.value.size(), 0.0);
  }
  return g;
}

// Finite-difference gradient of f with respect to one parameter tensor.
std::vector<double> numeric_grad(Network& net, std::size_t index,
                                 const std::function<double()>& f) {
  Tensor& param = net.params().entries()[index].value;
  const Tensor original = param.clone();
  const Tensor g = finite_diff_grad(
      [&](const Tensor& p) {
        std::copy(p.data().begin(), p.data().end(), param.mutable_data().begin());
        const double v = f();
        std::copy(original.data().begin(), original.data().end(), param.mutable_data().begin());
        return v;
      },
      original);
  return {g.data().begin(), g.data().end()};
}

double scalar_objective(const std::vector<double>& y, const std::vector<double>& pt,
                        const std::vector<double>& pc, double alpha) {
  // Written out term by term, independently of dann_objective.
  long double sy = 0, st = 0, sc = 0;
  for (double v : y) sy += v;
  for (double v : pt) st += v;
  for (double v : pc) sc += v;
  const long double my = sy / y.size();
  const long double mt = pt.empty() ? 0 : st / pt.size();
  const long double mc = pc.empty() ? 0 : sc / pc.size();
  return static_cast<double>((1 - alpha) * my - alpha * (mt + mc));
}

}  // namespace

TEST(DannObjective, WorkedExamples) {
  const std::vector<double> y{0.5, 0.7}, any{3.0}, none;
  EXPECT_NEAR(dann_objective(y, any, any, 0.0), 0.6, 1e-15);
  const std::vector<double> pt{0.2, 0.4}, pc{0.6};
  EXPECT_NEAR(dann_objective(y, pt, pc, 1.0), -0.9, 1e-15);
  const double l = std::numbers::ln2;
  const std::vector<double> one{l};
  EXPECT_NEAR(dann_objective(one, one, one, 0.5), -0.5 * l, 1e-15);
  EXPECT_NEAR(dann_objective(one, one, one, 0.5), -0.34657, 1e-5);
  EXPECT_NEAR(dann_objective(y, pt, none, 1.0), -0.3, 1e-15);
  EXPECT_THROW(dann_objective(none, pt, pc, 0.5), std::invalid_argument);
}

TEST(DannObjective, MatchesScalarEvaluation) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = trial == 0 ? 0.0 : trial == 1 ? 1.0 : rng.uniform();
    std::vector<double> y(1 + rng.below(6)), pt(y.size()), pc(trial % 3 == 0 ? 0 : rng.below(8));
    for (double& v : y) v = rng.uniform(0, 3);
    for (double& v : pt) v = rng.uniform(0, 3);
    for (double& v : pc) v = rng.uniform(0, 3);
    EXPECT_NEAR(dann_objective(y, pt, pc, alpha), scalar_objective(y, pt, pc, alpha), 1e-12);
  }
}

TEST(Schedules, AlphaRamp) {
  TrainConfig cfg;
  cfg.alpha_max = 0.3;
  cfg.alpha_ramp_epochs = 0;
  for (std::size_t e : {0, 1, 7}) EXPECT_EQ(alpha_at_epoch(e, cfg), 0.3);
  cfg.alpha_max = 0.8;
  cfg.alpha_ramp_epochs = 10;
  EXPECT_DOUBLE_EQ(alpha_at_epoch(5, cfg), 0.4);
  EXPECT_EQ(alpha_at_epoch(0, cfg), 0.0);
  EXPECT_EQ(alpha_at_epoch(10, cfg), 0.8);
  EXPECT_EQ(alpha_at_epoch(25, cfg), 0.8);
}

TEST(Schedules, StepDecay) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(lr_at_epoch(0, cfg), 0.01);
  EXPECT_DOUBLE_EQ(lr_at_epoch(2, cfg), 0.01);
  EXPECT_NEAR(lr_at_epoch(3, cfg), 0.001, 1e-18);
  EXPECT_NEAR(lr_at_epoch(7, cfg), 0.0001, 1e-18);
  cfg.lr_decay_every = 0;
  EXPECT_EQ(lr_at_epoch(100, cfg), 0.01);
  EXPECT_DOUBLE_EQ(TrainConfig::adversarial().base_lr, 0.001);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.alpha_max = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Sgd, PlainStep) {
  ParamStore params;
  params.add("x", Tensor({1}, 1.0));
  params.get("x").mutable_grad()[0] = 2.0;
  sgd_momentum_step(params, 0.1, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(params.get("x").at(0), 0.8);
}

TEST(Sgd, MomentumAndWeightDecay) {
  ParamStore params;
  params.add("x", Tensor({1}, 1.0));
  params.get("x").mutable_grad()[0] = 2.0;
  // v1 = -0.1 (2 + 0.5) = -0.25; x1 = 0.75
  sgd_momentum_step(params, 0.1, 0.9, 0.5);
  EXPECT_DOUBLE_EQ(params.get("x").at(0), 0.75);
  // v2 = 0.9 (-0.25) - 0.1 (2 + 0.375) = -0.4625; x2 = 0.2875
  sgd_momentum_step(params, 0.1, 0.9, 0.5);
  EXPECT_NEAR(params.get("x").at(0), 0.2875, 1e-15);
}

TEST(DannLoss, GradientsMatchFiniteDifferencesOfObjective) {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Network net = Network::create(toy_architecture(), {1, 4, 4}, 2, 100 + trial);
    const LabeledBatch batch = toy_batch(rng);
    const double alpha = trial == 0 ? 0.0 : trial == 1 ? 1.0 : rng.uniform();
    const Gradients g = backward_grads(net, batch, alpha);
    const auto entries = net.params().entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string& name = entries[i].name;
      auto numeric = numeric_grad(net, i, [&] { return objective_at(net, batch, alpha); });
      // theta_f and theta_y descend E; theta_p descends alpha L_p = -(dE/dtheta_p).
      if (name.rfind("protected.", 0) == 0)
        for (double& v : numeric) v = -v;
      EXPECT_LE(max_relative_error(g.per_param[i], numeric, 1e-6), 1e-4)
          << name << " alpha=" << alpha;
    }
  }
}

TEST(DannLoss, NegatedLossGivesSameFeatureGradients) {
  Rng rng(5);
  Network net = Network::create(toy_architecture(), {1, 4, 4}, 2, 3);
  const LabeledBatch batch = toy_batch(rng);
  const Gradients a = backward_grads(net, batch, 0.6, Reversal::layer);
  const Gradients b = backward_grads(net, batch, 0.6, Reversal::negated_loss);
  const auto entries = net.params().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t k = 0; k < a.per_param[i].size(); ++k) {
      const double expected =
          entries[i].name.rfind("protected.", 0) == 0 ? -a.per_param[i][k] : a.per_param[i][k];
      EXPECT_NEAR(b.per_param[i][k], expected, 1e-12) << entries[i].name;
    }
  }
}

TEST(DannLoss, OwnLossLeavesExtractorAndTargetGradientsUnchanged) {
  Rng rng(8);
  for (double alpha : {0.0, 0.35, 0.8, 1.0}) {
    Network net = Network::create(toy_architecture(), {1, 4, 4}, 2, 4);
    const LabeledBatch batch = toy_batch(rng);
    const Gradients a = backward_grads(net, batch, alpha, Reversal::layer, HeadUpdate::objective);
    const Gradients b = backward_grads(net, batch, alpha, Reversal::layer, HeadUpdate::own_loss);
    const Gradients c = backward_grads(net, batch, 1.0, Reversal::layer, HeadUpdate::objective);
    const auto entries = net.params().entries();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const bool is_protected = entries[i].name.rfind("protected.", 0) == 0;
      for (std::size_t k = 0; k < a.per_param[i].size(); ++k) {
        // Under own_loss theta_p sees the unweighted L_p gradient, which is
        // what the objective weighting gives at alpha = 1.
        const double expected = is_protected ? c.per_param[i][k] : a.per_param[i][k];
        EXPECT_NEAR(b.per_param[i][k], expected, 1e-12 * std::max(1.0, std::abs(expected)))
            << entries[i].name << " alpha=" << alpha;
      }
    }
  }
}

TEST(DannLoss, AlphaZeroSendsNothingFromProtectedLossIntoExtractor) {
  Rng rng(9);
  Network net = Network::create(toy_architecture(), {1, 4, 4}, 2, 6);
  const LabeledBatch batch = toy_batch(rng);
  const Gradients g = backward_grads(net, batch, 0.0);
  auto y_only = numeric_grad(net, 0, [&] {
    TrainingStreams streams(99);
    return dann_loss(net, batch, 0.0, Mode::train, streams).loss_y;
  });
  EXPECT_LE(max_relative_error(g.per_param[0], y_only, 1e-6), 1e-4);
}

TEST(DannLoss, ReportsLossesAndObjective) {
  Rng rng(10);
  Network net = Network::create(toy_architecture(), {1, 4, 4}, 2, 7);
  const LabeledBatch batch = toy_batch(rng);
  TrainingStreams streams(1);
  const DannLoss loss = dann_loss(net, batch, 0.25, Mode::eval, streams);
  EXPECT_NEAR(loss.objective, 0.75 * loss.loss_y - 0.25 * loss.loss_p, 1e-15);
  EXPECT_NEAR(loss.total.item(), 0.75 * loss.loss_y + 0.25 * loss.loss_p, 1e-15);
}

TEST(DannLoss, NoTargetRowsNeedsAlphaOne) {
  Rng rng(11);
  Network net = Network::create(toy_architecture(), {1, 4, 4}, 2, 7);
  const LabeledBatch batch = toy_batch(rng, 0, 3);
  TrainingStreams streams(1);
  EXPECT_THROW(dann_loss(net, batch, 0.5, Mode::eval, streams), std::invalid_argument);
  EXPECT_NO_THROW(dann_loss(net, batch, 1.0, Mode::eval, streams));
}

TEST(Training, AlphaZeroMatchesPlainClassifierBitwise) {
  DatasetSpec spec;
  spec.n_target_per_class = 6;
  spec.n_context_per_class = 0;
  spec.n_test_per_class = 2;
  spec.image_size = 12;
  spec.crop_size = 10;
  spec.min_radius = 2.0;
  spec.max_radius = 3.0;
  const Dataset data = generate(spec);
  const Architecture arch = toy_architecture();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.crop = 10;
  cfg.seed = 21;

  Network net = Network::create(arch, {1, 10, 10}, 2, cfg.seed);
  train(net, data, cfg);
  Classifier plain = Classifier::create(arch.features, arch.target_head, {1, 10, 10}, 2, cfg.seed);
  train_classifier(plain, data.target_train, Concept::target, cfg);

  for (const auto& entry : plain.params().entries()) {
    const Tensor& other = net.params().get(entry.name);
    ASSERT_EQ(other.size(), entry.value.size());
    for (std::size_t i = 0; i < other.size(); ++i)
      ASSERT_EQ(other.at(i), entry.value.at(i)) << entry.name << "[" << i << "]";
  }
}

TEST(Training, ReportHasEpochZeroAndIsDeterministic) {
  DatasetSpec spec;
  spec.n_target_per_class = 4;
  spec.n_context_per_class = 4;
  spec.n_test_per_class = 2;
  spec.image_size = 12;
  spec.crop_size = 10;
  spec.min_radius = 2.0;
  spec.max_radius = 3.0;
  const Dataset data = generate(spec);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 5;
  cfg.crop = 10;
  cfg.alpha_max = 0.5;
  cfg.alpha_ramp_epochs = 2;
  auto run = [&] {
    Network net = Network::create(toy_architecture(), {1, 10, 10}, 2, cfg.seed);
    return train(net, data, cfg);
  };
  const RunReport a = run(), b = run();
  ASSERT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.rows[0].epoch, 0u);
  EXPECT_EQ(a.rows[2].alpha, 0.25);
  std::ostringstream sa, sb;
  write_run_report(sa, a);
  write_run_report(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  std::istringstream in(sa.str());
  std::ostringstream again;
  write_run_report(again, read_run_report(in));
  EXPECT_EQ(again.str(), sa.str());
}

TEST(Training, ZeroEpochsGivesOnlyInitialRow) {
  DatasetSpec spec;
  spec.n_target_per_class = 2;
  spec.n_context_per_class = 2;
  spec.n_test_per_class = 1;
  spec.image_size = 12;
  spec.crop_size = 10;
  spec.min_radius = 2.0;
  spec.max_radius = 3.0;
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.crop = 10;
  Network net = Network::create(toy_architecture(), {1, 10, 10}, 2, 1);
  EXPECT_EQ(train(net, generate(spec), cfg).rows.size(), 1u);
}
