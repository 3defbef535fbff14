#include "agnostic/trainer.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "agnostic/metrics.hpp"
#include "agnostic/tensor_ops.hpp"

namespace agnostic {
namespace {

std::string format_double(double v) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v, std::chars_format::general, 17);
  return std::string(buffer, end);
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("run report line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

EpochMetrics evaluate_epoch(const Network& net, const Dataset& dataset, const TrainConfig& cfg,
                            std::size_t epoch) {
  EpochMetrics m;
  m.epoch = epoch;
  m.seed = cfg.seed;
  if (!dataset.target_test_iid.empty()) {
    m.acc_target_test =
        accuracy(net.target_view(), dataset.target_test_iid, Concept::target, cfg.crop);
  }
  if (!dataset.context_test.empty()) {
    m.acc_context_test = accuracy(net.protected_view(), dataset.context_test,
                                  Concept::protected_concept, cfg.crop);
  }
  return m;
}

}  // namespace

void write_run_report(std::ostream& out, const RunReport& report) {
  out << kRunReportHeader << '\n';
  for (const EpochMetrics& m : report.rows) {
    out << m.epoch << ',' << format_double(m.alpha) << ',' << format_double(m.lr) << ','
        << format_double(m.loss_y) << ',' << format_double(m.loss_p) << ','
        << format_double(m.acc_target_test) << ',' << format_double(m.acc_context_test) << ','
        << m.seed << '\n';
  }
}

RunReport read_run_report(std::istream& in) {
  RunReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kRunReportHeader) throw std::runtime_error("run report: unexpected header");
      continue;
    }
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string s; std::getline(fields, s, ',');) f.push_back(s);
    if (f.size() != 8) {
      throw std::runtime_error("run report line " + std::to_string(line_no) + ": expected 8 fields");
    }
    EpochMetrics m;
    m.epoch = static_cast<std::size_t>(parse_double(f[0], line_no));
    m.alpha = parse_double(f[1], line_no);
    m.lr = parse_double(f[2], line_no);
    m.loss_y = parse_double(f[3], line_no);
    m.loss_p = parse_double(f[4], line_no);
    m.acc_target_test = parse_double(f[5], line_no);
    m.acc_context_test = parse_double(f[6], line_no);
    m.seed = std::stoull(f[7]);
    report.rows.push_back(m);
  }
  return report;
}

RunReport train(Network& net, const Dataset& dataset, const TrainConfig& cfg,
                const EpochCallback& on_epoch) {
  cfg.validate();
  const auto& targets = dataset.target_train;
  const auto& contexts = dataset.context_train;
  if (targets.empty() && contexts.empty()) throw std::invalid_argument("train: no training data");
  TrainingStreams streams(cfg.seed);
  RunReport report;

  {
    // Epoch 0: the initialized network, evaluated without updates.
    EpochMetrics m = evaluate_epoch(net, dataset, cfg, 0);
    m.alpha = alpha_at_epoch(0, cfg);
    m.lr = lr_at_epoch(0, cfg);
    TrainingStreams eval_streams(cfg.seed);
    double sum_y = 0.0, sum_p = 0.0;
    const auto plans = plan_batches(targets.size(), contexts.size(), cfg.batch_size, cfg.seed, 0);
    for (const BatchPlan& plan : plans) {
      const LabeledBatch batch = make_batch(gather(plan, targets, contexts), cfg.crop, nullptr);
      const DannLoss loss = dann_loss(net, batch, m.alpha, Mode::eval, eval_streams);
      sum_y += loss.loss_y;
      sum_p += loss.loss_p;
    }
    m.loss_y = sum_y / static_cast<double>(plans.size());
    m.loss_p = sum_p / static_cast<double>(plans.size());
    report.rows.push_back(m);
    if (on_epoch) on_epoch(m);
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng augment_rng(derive_seed(cfg.seed, "augment", epoch));
    const auto plans =
        plan_batches(targets.size(), contexts.size(), cfg.batch_size, cfg.seed, epoch);
    double sum_y = 0.0, sum_p = 0.0;
    for (const BatchPlan& plan : plans) {
      const LabeledBatch batch =
          make_batch(gather(plan, targets, contexts), cfg.crop, &augment_rng);
      const StepResult step = saddle_sgd_step(net, batch, cfg, epoch, streams);
      sum_y += step.loss_y;
      sum_p += step.loss_p;
    }
    EpochMetrics m = evaluate_epoch(net, dataset, cfg, epoch + 1);
    m.alpha = alpha_at_epoch(epoch, cfg);
    m.lr = lr_at_epoch(epoch, cfg);
    m.loss_y = sum_y / static_cast<double>(plans.size());
    m.loss_p = sum_p / static_cast<double>(plans.size());
    report.rows.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return report;
}

std::vector<double> train_classifier(Classifier& model, std::span<const Example> examples,
                                     Concept which, const TrainConfig& cfg) {
  cfg.validate();
  if (examples.empty()) throw std::invalid_argument("train_classifier: no training data");
  TrainingStreams streams(cfg.seed);
  std::vector<double> epoch_loss;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng augment_rng(derive_seed(cfg.seed, "augment", epoch));
    const double lr = lr_at_epoch(epoch, cfg);
    const auto plans = plan_batches(examples.size(), 0, cfg.batch_size, cfg.seed, epoch);
    double total = 0.0;
    for (const BatchPlan& plan : plans) {
      const LabeledBatch batch = make_batch(gather(plan, examples, {}), cfg.crop, &augment_rng);
      std::vector<int> labels;
      labels.reserve(batch.size());
      for (std::size_t i : plan.target) labels.push_back(label_of(examples[i], which));
      {
        Tape tape;
        const Tensor logits = head_logits(model.view(), batch.images, Mode::train,
                                          streams.features, streams.target);
        const Tensor loss = softmax_cross_entropy(logits, labels);
        model.params().zero_grad();
        tape.backward(loss);
        total += loss.item();
      }
      sgd_momentum_step(model.params(), lr, cfg.momentum, cfg.weight_decay);
    }
    epoch_loss.push_back(total / static_cast<double>(plans.size()));
  }
  return epoch_loss;
}

}  // namespace agnostic
