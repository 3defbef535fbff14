#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "agnostic/dann.hpp"
#include "agnostic/dataset.hpp"
#include "agnostic/probe.hpp"
#include "agnostic/trainer.hpp"

namespace agnostic {

// Final accuracies of one trained adversarial network.
struct RunOutcome {
  double alpha = 0.0;
  std::uint64_t repeat_seed = 0;
  double acc_target_test = 0.0;
  double acc_target_swapped = 0.0;
  double acc_context_test = 0.0;
  double probe_acc = 0.0;
};

struct SweepConfig {
  std::vector<double> alphas;
  std::vector<std::uint64_t> repeat_seeds;
  Architecture arch;
  // alpha_max and seed are overridden per run.
  TrainConfig train;
  ProbeConfig probe;
  // Worker threads; results do not depend on it.
  std::size_t jobs = 1;
};

// Mean and population standard deviation (divide by n) over repeats.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> values);

struct SweepSummaryRow {
  double alpha = 0.0;
  std::size_t repeats = 0;
  MeanStd acc_target_test;
  MeanStd acc_target_swapped;
  MeanStd acc_context_test;
  MeanStd probe_acc;
};

struct SweepResult {
  // Ordered by alpha (as given), then by repeat seed (as given).
  std::vector<RunOutcome> rows;
  std::vector<SweepSummaryRow> summary() const;
};

// Trains one network with cfg (alpha_max and seed as given there), then
// measures the target, swapped and context accuracies and the probe. The
// trained network and its per-epoch report are handed back when asked for.
RunOutcome run_once(const Dataset& dataset, const Architecture& arch, const TrainConfig& cfg,
                    const ProbeConfig& probe, Network* trained = nullptr,
                    RunReport* report = nullptr);

// Trains a fresh network for every (alpha, seed) pair. The probe seed of a
// run is derived from its repeat seed.
SweepResult sweep_alpha(const Dataset& dataset, const SweepConfig& cfg);

inline constexpr const char* kSweepHeader =
    "alpha,repeat_seed,acc_target_test,acc_target_swapped,acc_context_test,probe_acc";

void write_sweep_csv(std::ostream& out, const SweepResult& result);
SweepResult read_sweep_csv(std::istream& in);
// Per-alpha means and standard deviations, preceded by a comment line that
// states the standard deviation convention.
void write_sweep_summary(std::ostream& out, const SweepResult& result);

}  // namespace agnostic
