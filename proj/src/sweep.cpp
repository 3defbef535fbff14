#include "agnostic/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "agnostic/metrics.hpp"
#include "agnostic/trainer.hpp"

namespace agnostic {
namespace {

std::string fmt(double v) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v, std::chars_format::general, 17);
  return std::string(buffer, end);
}

}  // namespace

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  // Identical repeats report exactly their value and a zero spread.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; })) {
    out.mean = values[0];
    return out;
  }
  const auto n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

std::vector<SweepSummaryRow> SweepResult::summary() const {
  std::vector<SweepSummaryRow> out;
  std::vector<double> alphas;
  for (const RunOutcome& r : rows)
    if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) alphas.push_back(r.alpha);
  for (double alpha : alphas) {
    std::vector<double> t, s, c, p;
    for (const RunOutcome& r : rows) {
      if (r.alpha != alpha) continue;
      t.push_back(r.acc_target_test);
      s.push_back(r.acc_target_swapped);
      c.push_back(r.acc_context_test);
      p.push_back(r.probe_acc);
    }
    out.push_back({alpha, t.size(), mean_std(t), mean_std(s), mean_std(c), mean_std(p)});
  }
  return out;
}

RunOutcome run_once(const Dataset& dataset, const Architecture& arch, const TrainConfig& cfg,
                    const ProbeConfig& probe, Network* trained, RunReport* report) {
  if (dataset.target_train.empty()) throw std::invalid_argument("run: no target training data");
  const Shape input{dataset.target_train.front().image.dim(0), cfg.crop, cfg.crop};
  Network net = Network::create(arch, input, 2, cfg.seed);
  RunReport epochs = train(net, dataset, cfg);
  if (report != nullptr) *report = std::move(epochs);
  RunOutcome out;
  out.alpha = cfg.alpha_max;
  out.repeat_seed = cfg.seed;
  out.acc_target_test = accuracy(net.target_view(), dataset.target_test_iid, Concept::target, cfg.crop);
  out.acc_target_swapped =
      accuracy(net.target_view(), dataset.target_test_swapped, Concept::target, cfg.crop);
  out.acc_context_test = accuracy(net.protected_view(), dataset.context_test,
                                  Concept::protected_concept, cfg.crop);
  out.probe_acc = probe_agnosticism(net, dataset, cfg.crop, probe);
  if (trained != nullptr) *trained = std::move(net);
  return out;
}

SweepResult sweep_alpha(const Dataset& dataset, const SweepConfig& cfg) {
  for (double a : cfg.alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("sweep: alpha outside [0, 1]");
  }
  const std::size_t n_seeds = cfg.repeat_seeds.size();
  const std::size_t total = cfg.alphas.size() * n_seeds;
  SweepResult result;
  result.rows.resize(total);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        TrainConfig run = cfg.train;
        run.alpha_max = cfg.alphas[i / n_seeds];
        run.seed = cfg.repeat_seeds[i % n_seeds];
        ProbeConfig probe = cfg.probe;
        probe.seed = derive_seed(run.seed, "probe");
        result.rows[i] = run_once(dataset, cfg.arch, run, probe);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, total));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << kSweepHeader << '\n';
  for (const RunOutcome& r : result.rows) {
    out << fmt(r.alpha) << ',' << r.repeat_seed << ',' << fmt(r.acc_target_test) << ','
        << fmt(r.acc_target_swapped) << ',' << fmt(r.acc_context_test) << ','
        << fmt(r.probe_acc) << '\n';
  }
}

SweepResult read_sweep_csv(std::istream& in) {
  SweepResult result;
  std::string line;
  std::size_t line_no = 0;
  auto number = [&line_no](const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw std::runtime_error("sweep csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line == kSweepHeader) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string s; std::getline(fields, s, ',');) f.push_back(s);
    if (f.size() != 6) {
      throw std::runtime_error("sweep csv line " + std::to_string(line_no) + ": expected 6 fields");
    }
    RunOutcome r;
    r.alpha = number(f[0]);
    r.repeat_seed = std::stoull(f[1]);
    r.acc_target_test = number(f[2]);
    r.acc_target_swapped = number(f[3]);
    r.acc_context_test = number(f[4]);
    r.probe_acc = number(f[5]);
    result.rows.push_back(r);
  }
  return result;
}

void write_sweep_summary(std::ostream& out, const SweepResult& result) {
  out << "# mean and population standard deviation (divide by n) over repeats\n";
  out << "alpha,repeats,acc_target_test_mean,acc_target_test_std,acc_target_swapped_mean,"
         "acc_target_swapped_std,acc_context_test_mean,acc_context_test_std,probe_acc_mean,"
         "probe_acc_std\n";
  for (const SweepSummaryRow& s : result.summary()) {
    out << fmt(s.alpha) << ',' << s.repeats;
    for (const MeanStd& m : {s.acc_target_test, s.acc_target_swapped, s.acc_context_test, s.probe_acc})
      out << ',' << fmt(m.mean) << ',' << fmt(m.std);
    out << '\n';
  }
}

}  // namespace agnostic
