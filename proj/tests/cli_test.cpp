#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <unistd.h>

#include "agnostic/dataset_io.hpp"
#include "agnostic/report.hpp"
#include "agnostic/sweep.hpp"
#include "agnostic/trainer.hpp"

using namespace agnostic;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("agnostic_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(AGNOSTIC_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

// A small dataset shared by the training commands.
const std::string& small_data() {
  static const std::string dir = [] {
    const std::string d = path("small");
    EXPECT_EQ(cli("gen-data --out " + d + " --n-target 12 --n-context 12 --n-test 6 --rho 0.5"), 0);
    return d;
  }();
  return dir;
}

const std::string kQuick = " --epochs 1 --batch 16";

class RemoveWorkDir : public ::testing::Environment {
 public:
  void TearDown() override { fs::remove_all(work_dir()); }
};
const auto* const kCleanup = ::testing::AddGlobalTestEnvironment(new RemoveWorkDir);

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      files[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return files;
}

}  // namespace

TEST(CliGenData, DefaultCounts) {
  ASSERT_EQ(cli("gen-data --out " + path("default")), 0);
  const Dataset d = load_dataset(path("default"));
  EXPECT_EQ(d.target_train.size(), 2u * 500);
  EXPECT_EQ(d.context_train.size(), 2u * 1000);
  EXPECT_EQ(d.target_test_iid.size() + d.target_test_swapped.size() + d.context_test.size(), 600u);
  EXPECT_TRUE(fs::exists(path("default") + "/manifest.json"));
}

TEST(CliGenData, RhoIsCountable) {
  ASSERT_EQ(cli("gen-data --out " + path("rho") + " --n-target 100 --n-context 2 --rho 0.5"), 0);
  const Dataset d = load_dataset(path("rho"));
  std::size_t matched = 0;
  for (const Example& ex : d.target_train) matched += *ex.target_label == ex.protected_label;
  EXPECT_DOUBLE_EQ(static_cast<double>(matched) / d.target_train.size(), 0.5);
}

TEST(CliGenData, SameSeedSameTreeAndRefusesNonEmpty) {
  const std::string args = " --n-target 5 --n-context 5 --n-test 3 --seed 3";
  ASSERT_EQ(cli("gen-data --out " + path("a") + args), 0);
  ASSERT_EQ(cli("gen-data --out " + path("b") + args), 0);
  EXPECT_EQ(tree(path("a")), tree(path("b")));
  EXPECT_NE(cli("gen-data --out " + path("a") + args), 0);
  EXPECT_EQ(cli("gen-data --out " + path("a") + args + " --force"), 0);
  EXPECT_EQ(tree(path("a")), tree(path("b")));
}

TEST(CliGenData, SeedFromEnvironment) {
  ASSERT_EQ(cli("gen-data --out " + path("env_default") + " --n-target 3 --n-context 3 --n-test 2"), 0);
  const std::string with_env = "AGNOSTIC_NET_SEED=3 " + std::string(AGNOSTIC_CLI) + " gen-data --out " +
                               path("env") + " --n-target 3 --n-context 3 --n-test 2 > /dev/null";
  ASSERT_EQ(std::system(with_env.c_str()), 0);
  ASSERT_EQ(cli("gen-data --out " + path("explicit") + " --n-target 3 --n-context 3 --n-test 2 --seed 3"), 0);
  EXPECT_EQ(tree(path("env")), tree(path("explicit")));
  EXPECT_NE(tree(path("env")), tree(path("env_default")));
}

TEST(CliUsage, ErrorsExitNonzero) {
  EXPECT_NE(cli(""), 0);
  EXPECT_NE(cli("gen-data"), 0);
  EXPECT_NE(cli("gen-data --out " + path("x") + " --bogus 1"), 0);
  EXPECT_NE(cli("train --data " + path("missing") + " --out " + path("y")), 0);
  EXPECT_NE(cli("gen-data --out " + path("z") + " --rho 1.5"), 0);
  EXPECT_FALSE(fs::exists(path("z")));
}

TEST(CliTrain, AlphaZeroIsTheSupervisedBaseline) {
  ASSERT_EQ(cli("train --data " + small_data() + " --out " + path("train0") + " --alpha-max 0" + kQuick), 0);
  std::ifstream in(path("train0") + "/report.csv");
  const RunReport report = read_run_report(in);
  ASSERT_EQ(report.rows.size(), 2u);
  for (const EpochMetrics& m : report.rows) {
    EXPECT_EQ(m.alpha, 0.0);
    EXPECT_EQ(m.lr, TrainConfig{}.base_lr);
  }
  EXPECT_TRUE(fs::exists(path("train0") + "/model.ckpt"));
}

TEST(CliTrain, ReplayReproducesEveryCsv) {
  ASSERT_EQ(cli("train --data " + small_data() + " --out " + path("train1") + " --alpha-max 0.5" + kQuick), 0);
  ASSERT_EQ(cli("replay --manifest " + path("train1") + "/manifest.json --out " + path("train1_again")), 0);
  for (const char* f : {"report.csv", "final.csv", "model.ckpt"})
    EXPECT_EQ(read_file(path("train1") + "/" + f), read_file(path("train1_again") + "/" + f)) << f;
}

TEST(CliSweep, GridSizeOrderAndJobs) {
  const std::string args = " --data " + small_data() + " --alphas 0,0.8 --repeats 3" + kQuick;
  ASSERT_EQ(cli("sweep --out " + path("sweep1") + args), 0);
  ASSERT_EQ(cli("sweep --out " + path("sweep2") + args + " --jobs 3"), 0);
  std::ifstream in(path("sweep1") + "/sweep.csv");
  const SweepResult r = read_sweep_csv(in);
  ASSERT_EQ(r.rows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(r.rows[i].alpha, i < 3 ? 0.0 : 0.8);
    EXPECT_EQ(r.rows[i].repeat_seed, 7u + i % 3);
  }
  EXPECT_EQ(read_file(path("sweep1") + "/sweep.csv"), read_file(path("sweep2") + "/sweep.csv"));
  EXPECT_EQ(read_file(path("sweep1") + "/summary.csv"), read_file(path("sweep2") + "/summary.csv"));

  // Report means agree with hand-averaged rows.
  ASSERT_EQ(cli("report --in " + path("sweep1") + "/sweep.csv --out " + path("report")), 0);
  EXPECT_TRUE(fs::exists(path("report") + "/sweep.svg"));
  EXPECT_TRUE(fs::exists(path("report") + "/sweep.txt"));
  std::ifstream summary_in(path("sweep1") + "/summary.csv");
  const CsvTable summary = read_csv(summary_in);
  const auto means = summary.numeric_column("acc_target_test_mean");
  ASSERT_EQ(means.size(), 2u);
  for (std::size_t a = 0; a < 2; ++a) {
    double hand = 0.0;
    for (std::size_t k = 0; k < 3; ++k) hand += r.rows[3 * a + k].acc_target_test;
    EXPECT_NEAR(means[a], hand / 3.0, 1e-12);
  }
  EXPECT_NE(read_file(path("report") + "/sweep.summary.txt").find("alpha"), std::string::npos);
}

TEST(CliProbeAndActmap, WriteTheirOutputs) {
  ASSERT_EQ(cli("train --data " + small_data() + " --out " + path("m0") + " --alpha-max 0" + kQuick), 0);
  ASSERT_EQ(cli("train --data " + small_data() + " --out " + path("m8") + " --alpha-max 0.8" + kQuick), 0);
  ASSERT_EQ(cli("probe --data " + small_data() + " --model " + path("m8") + "/model.ckpt --out " + path("probe")), 0);
  std::ifstream probe_in(path("probe") + "/probe.csv");
  const CsvTable probe = read_csv(probe_in);
  ASSERT_EQ(probe.rows.size(), 1u);
  const double acc = probe.numeric_column("probe_acc")[0];
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);

  ASSERT_EQ(cli("actmap --data " + small_data() + " --model " + path("m0") + "/model.ckpt --compare " + path("m8") +
                "/model.ckpt --top-k 4 --out " + path("act")),
            0);
  const Dataset d = load_dataset(small_data());
  for (const Example& ex : d.target_test_iid) EXPECT_TRUE(fs::exists(path("act") + "/" + ex.id + ".act.pgm")) << ex.id;
  std::ifstream picks_in(path("act") + "/least_correlated.csv");
  const CsvTable picks = read_csv(picks_in);
  EXPECT_EQ(picks.rows.size(), 4u);
  const auto corr = picks.numeric_column("correlation");
  for (std::size_t i = 1; i < corr.size(); ++i) EXPECT_LE(corr[i - 1], corr[i]);
  EXPECT_NE(cli("actmap --data " + small_data() + " --model " + path("m0") + "/model.ckpt --split nowhere --out " +
                path("act2")),
            0);
}
