#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agnostic/activation_map.hpp"
#include "agnostic/checkpoint.hpp"
#include "agnostic/cross_domain.hpp"
#include "agnostic/dataset_io.hpp"
#include "agnostic/generator.hpp"
#include "agnostic/metrics.hpp"
#include "agnostic/pgm.hpp"
#include "agnostic/probe.hpp"
#include "agnostic/report.hpp"
#include "agnostic/sweep.hpp"
#include "agnostic/trainer.hpp"
#include "run_manifest.hpp"

namespace fs = std::filesystem;
using namespace agnostic;
using namespace agnostic::cli;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("AGNOSTIC_NET_SEED");
  if (env == nullptr || *env == '\0') return 7;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw UsageError("AGNOSTIC_NET_SEED must be a non-negative integer, got '" + std::string(text) + "'");
  }
  return seed;
}

std::string num(double v) {
  char buffer[32];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v, std::chars_format::general, 17);
  return std::string(buffer, end);
}

// Refuses a non-empty directory unless forced, in which case it is emptied.
void prepare_out(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw UsageError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir)) {
      if (!force) throw UsageError(dir.string() + " is not empty; pass --force to overwrite");
      for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
    }
  }
  fs::create_directories(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write");
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

bool is_path_option(const std::string& name) {
  return name == "data" || name == "arch" || name == "model" || name == "compare" || name == "in";
}

// Every long option of a subcommand with its resolved value; flags as
// true/false, unset options without a default as "". Input paths are made
// absolute so a replay works from any directory.
std::map<std::string, std::string> resolved_options(const CLI::App& app) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->get_expected_max() == 0) {
      out[name] = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      std::string joined;
      for (const std::string& r : opt->results()) {
        const std::string v = is_path_option(name) ? fs::absolute(r).lexically_normal().string() : r;
        joined += (joined.empty() ? "" : ",") + v;
      }
      out[name] = joined;
    } else {
      out[name] = opt->get_default_str();
    }
  }
  return out;
}

struct Common {
  fs::path out;
  bool force = false;
  std::uint64_t seed = 7;
};

void add_common(CLI::App* app, Common& c, bool with_seed = true) {
  app->add_option("--out", c.out, "Output directory")->required();
  app->add_flag("--force", c.force, "Empty a non-empty output directory first");
  if (with_seed) {
    c.seed = default_seed();
    app->add_option("--seed", c.seed, "Seed (default $AGNOSTIC_NET_SEED or 7)")->capture_default_str();
  }
}

struct DataFlags {
  std::size_t n_target = 500;
  std::size_t n_context = 1000;
  std::size_t n_test = 100;
  double rho = 1.0;
  std::size_t size = 40;
  std::size_t crop = 32;
  double noise = 0.05;
  double min_radius = DatasetSpec{}.min_radius;
  double max_radius = DatasetSpec{}.max_radius;
  bool context_shapes = false;
};

struct TrainFlags {
  fs::path data;
  fs::path arch;
  double alpha_max = 0.0;
  std::optional<std::size_t> ramp_epochs;
  std::size_t epochs = TrainConfig{}.epochs;
  std::optional<double> lr;
  std::size_t decay_every = TrainConfig{}.lr_decay_every;
  double decay_factor = TrainConfig{}.lr_decay_factor;
  double momentum = TrainConfig{}.momentum;
  double weight_decay = TrainConfig{}.weight_decay;
  std::size_t batch = TrainConfig{}.batch_size;
  std::size_t crop = TrainConfig{}.crop;
  std::string head_update = "own_loss";
};

void add_data_input(CLI::App* app, TrainFlags& t) {
  app->add_option("--data", t.data, "Dataset directory written by gen-data")->required()->check(CLI::ExistingDirectory);
}

void add_train_flags(CLI::App* app, TrainFlags& t, bool with_alpha) {
  add_data_input(app, t);
  app->add_option("--arch", t.arch, "Architecture file (default: built-in)")->check(CLI::ExistingFile);
  if (with_alpha) {
    app->add_option("--alpha-max", t.alpha_max, "Final trade-off alpha")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app->add_option("--ramp-epochs", t.ramp_epochs, "Epochs of the linear alpha ramp (default: half the epochs)");
    app->add_option("--head-update", t.head_update, "What the protected head descends")
        ->capture_default_str()
        ->check(CLI::IsMember({"own_loss", "objective"}));
  }
  app->add_option("--epochs", t.epochs)->capture_default_str();
  app->add_option("--lr", t.lr, "Base learning rate (default 0.01 without an adversary, else 0.001)");
  app->add_option("--lr-decay-every", t.decay_every, "0 disables decay")->capture_default_str();
  app->add_option("--lr-decay-factor", t.decay_factor)->capture_default_str();
  app->add_option("--momentum", t.momentum)->capture_default_str();
  app->add_option("--weight-decay", t.weight_decay)->capture_default_str();
  app->add_option("--batch", t.batch)->capture_default_str();
  app->add_option("--crop", t.crop, "Training crop side")->capture_default_str();
}

TrainConfig resolve_train(const TrainFlags& t, std::uint64_t seed, bool adversarial) {
  TrainConfig cfg = adversarial ? TrainConfig::adversarial() : TrainConfig{};
  cfg.alpha_max = t.alpha_max;
  cfg.epochs = t.epochs;
  cfg.alpha_ramp_epochs = t.ramp_epochs.value_or(t.epochs / 2);
  if (t.lr) cfg.base_lr = *t.lr;
  cfg.lr_decay_every = t.decay_every;
  cfg.lr_decay_factor = t.decay_factor;
  cfg.momentum = t.momentum;
  cfg.weight_decay = t.weight_decay;
  cfg.batch_size = t.batch;
  cfg.crop = t.crop;
  cfg.seed = seed;
  cfg.head_update = t.head_update == "objective" ? HeadUpdate::objective : HeadUpdate::own_loss;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

Architecture resolve_arch(const fs::path& path) {
  if (path.empty()) return default_architecture();
  return parse_architecture(read_text(path));
}

Dataset load_input(const fs::path& dir, RunManifest& manifest) {
  Dataset d = load_dataset(dir);
  if (d.empty()) throw UsageError(dir.string() + ": no dataset (manifest.csv missing)");
  manifest.dataset_hash = file_hash(dir / kManifestName);
  if (fs::exists(dir / kRunManifestName)) {
    const RunManifest source = read_run_manifest(dir / kRunManifestName);
    manifest.dataset_spec = source.dataset_spec;
  }
  return d;
}

RunManifest start_manifest(const CLI::App& app, std::uint64_t seed) {
  RunManifest m;
  m.command = app.get_name();
  m.seed = seed;
  m.options = resolved_options(app);
  return m;
}

void write_outcome_csv(const fs::path& path, const RunOutcome& r) {
  SweepResult one;
  one.rows.push_back(r);
  auto out = open_out(path);
  write_sweep_csv(out, one);
}

// --- commands ---------------------------------------------------------------

void cmd_gen_data(const CLI::App& app, const Common& c, const DataFlags& f) {
  DatasetSpec spec;
  spec.n_target_per_class = f.n_target;
  spec.n_context_per_class = f.n_context;
  spec.n_test_per_class = f.n_test;
  spec.correlation = f.rho;
  spec.image_size = f.size;
  spec.crop_size = f.crop;
  spec.noise_level = f.noise;
  spec.min_radius = f.min_radius;
  spec.max_radius = f.max_radius;
  spec.seed = c.seed;
  spec.context_shapes = f.context_shapes;
  Dataset d;
  try {
    d = generate(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  prepare_out(c.out, c.force);
  save_dataset(d, c.out);
  RunManifest m = start_manifest(app, c.seed);
  m.dataset_spec = spec;
  write_run_manifest(c.out, m);
  std::cout << "wrote " << d.total_size() << " images to " << c.out.string() << '\n';
}

void cmd_train(const CLI::App& app, const Common& c, const TrainFlags& t) {
  const TrainConfig cfg = resolve_train(t, c.seed, t.alpha_max > 0.0);
  const Architecture arch = resolve_arch(t.arch);
  RunManifest m = start_manifest(app, c.seed);
  const Dataset d = load_input(t.data, m);
  prepare_out(c.out, c.force);
  m.train = cfg;
  m.architecture = to_string(arch);

  ProbeConfig probe;
  probe.seed = derive_seed(cfg.seed, "probe");
  Network net = Network::create(arch, {1, 1, 1}, 2, 0);
  RunReport report;
  const RunOutcome outcome = run_once(d, arch, cfg, probe, &net, &report);
  {
    auto out = open_out(c.out / "report.csv");
    write_run_report(out, report);
  }
  write_outcome_csv(c.out / "final.csv", outcome);
  save_checkpoint(c.out / "model.ckpt", net);
  write_run_manifest(c.out, m);
  std::cout << "target_test " << outcome.acc_target_test << "  swapped " << outcome.acc_target_swapped
            << "  context_test " << outcome.acc_context_test << "  probe " << outcome.probe_acc << '\n';
}

void cmd_sweep(const CLI::App& app, const Common& c, const TrainFlags& t,
               const std::vector<double>& alphas, std::size_t repeats, std::size_t jobs) {
  if (alphas.empty()) throw UsageError("--alphas is empty");
  if (repeats == 0) throw UsageError("--repeats must be positive");
  SweepConfig sweep;
  sweep.alphas = alphas;
  for (std::size_t r = 0; r < repeats; ++r) sweep.repeat_seeds.push_back(c.seed + r);
  sweep.arch = resolve_arch(t.arch);
  sweep.train = resolve_train(t, c.seed, true);
  sweep.jobs = jobs;
  RunManifest m = start_manifest(app, c.seed);
  const Dataset d = load_input(t.data, m);
  prepare_out(c.out, c.force);
  m.train = sweep.train;
  m.architecture = to_string(sweep.arch);

  const SweepResult result = sweep_alpha(d, sweep);
  {
    auto out = open_out(c.out / "sweep.csv");
    write_sweep_csv(out, result);
  }
  {
    auto out = open_out(c.out / "summary.csv");
    write_sweep_summary(out, result);
  }
  write_run_manifest(c.out, m);
  write_text_table(std::cout, summary_table(result));
}

void cmd_probe(const CLI::App& app, const Common& c, const TrainFlags& t, const fs::path& model,
               ProbeConfig probe) {
  RunManifest m = start_manifest(app, c.seed);
  const Dataset d = load_input(t.data, m);
  const Network net = load_checkpoint(model);
  prepare_out(c.out, c.force);
  probe.seed = c.seed;
  const std::size_t crop = net.input_shape()[1];
  RunOutcome r;
  r.repeat_seed = c.seed;
  r.acc_target_test = accuracy(net.target_view(), d.target_test_iid, Concept::target, crop);
  r.acc_target_swapped = accuracy(net.target_view(), d.target_test_swapped, Concept::target, crop);
  r.acc_context_test = accuracy(net.protected_view(), d.context_test, Concept::protected_concept, crop);
  r.probe_acc = probe_agnosticism(net, d, crop, probe);
  {
    auto out = open_out(c.out / "probe.csv");
    out << "model,probe_acc,chance,acc_target_test,acc_target_swapped,acc_context_test\n"
        << model.filename().string() << ',' << num(r.probe_acc) << ',' << num(0.5) << ','
        << num(r.acc_target_test) << ',' << num(r.acc_target_swapped) << ',' << num(r.acc_context_test) << '\n';
  }
  write_run_manifest(c.out, m);
  std::cout << "probe accuracy " << r.probe_acc << " (chance 0.5)\n";
}

void write_map(const fs::path& path, const ActivationMap& map) { write_pgm(path, to_gray(map.values)); }

void cmd_actmap(const CLI::App& app, const Common& c, const TrainFlags& t, const fs::path& model,
                const std::string& split_text, const fs::path& compare, std::size_t top_k) {
  const std::optional<Split> split = parse_split(split_text);
  if (!split) throw UsageError("unknown split '" + split_text + "'");
  RunManifest m = start_manifest(app, c.seed);
  const Dataset d = load_input(t.data, m);
  const Network net = load_checkpoint(model);
  std::optional<Network> other;
  if (!compare.empty()) other = load_checkpoint(compare);
  prepare_out(c.out, c.force);

  const auto& examples = d.split(*split);
  const std::size_t crop = net.input_shape()[1];
  const auto maps = activation_maps(net, examples, crop);
  std::vector<ActivationMap> other_maps;
  if (other) other_maps = activation_maps(*other, examples, other->input_shape()[1]);

  auto table = open_out(c.out / "maps.csv");
  table << "id,in_mask_mass" << (other ? ",compare_in_mask_mass,correlation" : "") << '\n';
  for (std::size_t i = 0; i < examples.size(); ++i) {
    write_map(c.out / (examples[i].id + ".act.pgm"), maps[i]);
    const Tensor mask = center_crop(examples[i], crop).mask;
    table << examples[i].id << ',' << num(in_mask_mass(maps[i], mask));
    if (other) {
      const Tensor other_mask = center_crop(examples[i], other->input_shape()[1]).mask;
      table << ',' << num(in_mask_mass(other_maps[i], other_mask)) << ','
            << num(compare_maps(maps[i], other_maps[i]));
    }
    table << '\n';
  }
  if (other) {
    auto picks = open_out(c.out / "least_correlated.csv");
    picks << "rank,id,correlation\n";
    const auto order = least_correlated(maps, other_maps, top_k);
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t i = order[r];
      picks << r << ',' << examples[i].id << ',' << num(compare_maps(maps[i], other_maps[i])) << '\n';
      write_map(c.out / (examples[i].id + ".compare.act.pgm"), other_maps[i]);
    }
  }
  write_run_manifest(c.out, m);
  std::cout << "wrote " << examples.size() << " activation maps for " << split_text << '\n';
}

void cmd_cross_domain(const CLI::App& app, const Common& c, const TrainFlags& t) {
  const TrainConfig cfg = resolve_train(t, c.seed, false);
  const Architecture arch = resolve_arch(t.arch);
  RunManifest m = start_manifest(app, c.seed);
  const Dataset d = load_input(t.data, m);
  prepare_out(c.out, c.force);
  m.train = cfg;
  m.architecture = to_string(arch);
  const CrossDomainTable table = cross_domain_eval(d, arch, cfg);
  {
    auto out = open_out(c.out / "cross_domain.csv");
    out << "model,acc_target_test_iid,acc_context_test\n"
        << "target," << num(table.target_model_on_target) << ',' << num(table.target_model_on_context) << '\n'
        << "context," << num(table.context_model_on_target) << ',' << num(table.context_model_on_context) << '\n';
  }
  write_run_manifest(c.out, m);
  std::cout << "target model:  target_test_iid " << table.target_model_on_target << "  context_test "
            << table.target_model_on_context << "\ncontext model: target_test_iid "
            << table.context_model_on_target << "  context_test " << table.context_model_on_context << '\n';
}

void cmd_report(const CLI::App& app, const Common& c, const std::vector<fs::path>& inputs) {
  RunManifest m = start_manifest(app, c.seed);
  std::vector<std::pair<fs::path, std::string>> texts;
  for (const fs::path& in : inputs) texts.emplace_back(in, read_text(in));
  prepare_out(c.out, c.force);
  for (const auto& [path, text] : texts) {
    const std::string stem = path.stem().string();
    std::istringstream in(text);
    const CsvTable table = read_csv(in);
    {
      auto out = open_out(c.out / (stem + ".txt"));
      write_text_table(out, table);
    }
    std::string header;
    for (const std::string& h : table.header) header += (header.empty() ? "" : ",") + h;
    std::istringstream again(text);
    if (header == kSweepHeader) {
      const SweepResult result = read_sweep_csv(again);
      auto svg = open_out(c.out / (stem + ".svg"));
      write_svg(svg, alpha_chart(result));
      auto summary = open_out(c.out / (stem + ".summary.txt"));
      write_text_table(summary, summary_table(result));
    } else if (header == kRunReportHeader) {
      auto svg = open_out(c.out / (stem + ".svg"));
      write_svg(svg, epoch_chart(read_run_report(again)));
    }
  }
  write_run_manifest(c.out, m);
}

int run(int argc, char** argv);

// Reruns the command recorded in a manifest into a new output directory.
int cmd_replay(const fs::path& manifest_path, const fs::path& out, const char* program) {
  const RunManifest m = read_run_manifest(manifest_path);
  std::vector<std::string> args{program, m.command};
  fs::path arch_file;
  if (m.architecture) {
    arch_file = fs::temp_directory_path() / ("agnostic-replay-" + fnv1a_hex(*m.architecture) + ".arch");
    open_out(arch_file) << *m.architecture;
  }
  for (const auto& [name, value] : m.options) {
    if (name == "out" || name == "force") continue;
    if (value == "false" || value.empty()) continue;
    if (name == "arch" && !arch_file.empty()) {
      args.insert(args.end(), {"--arch", arch_file.string()});
    } else if (value == "true") {
      args.push_back("--" + name);
    } else {
      args.push_back("--" + name + "=" + value);
    }
  }
  if (m.dataset_hash) {
    const fs::path data = m.options.at("data");
    if (file_hash(data / kManifestName) != *m.dataset_hash) {
      throw UsageError(data.string() + " no longer matches the recorded dataset");
    }
  }
  args.insert(args.end(), {"--out", out.string(), "--force"});
  std::vector<char*> argv_new;
  for (std::string& a : args) argv_new.push_back(a.data());
  const int code = run(static_cast<int>(argv_new.size()), argv_new.data());
  if (!arch_file.empty()) fs::remove(arch_file);
  return code;
}

int run(int argc, char** argv) {
  CLI::App app{"Adversarial training of representations agnostic to a protected concept"};
  app.require_subcommand(1);

  Common c;
  DataFlags data;
  TrainFlags t;
  std::vector<double> alphas{0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t repeats = 10, jobs = 1, top_k = 10;
  fs::path model, compare, manifest_path;
  std::string split = "target_test_iid";
  std::vector<fs::path> inputs;
  ProbeConfig probe;

  auto* gen = app.add_subcommand("gen-data", "Generate the synthetic confounded dataset");
  add_common(gen, c);
  gen->add_option("--n-target", data.n_target, "Target images per shape class")->capture_default_str();
  gen->add_option("--n-context", data.n_context, "Context-only images per background class")->capture_default_str();
  gen->add_option("--n-test", data.n_test, "Hold-out images per class and split")->capture_default_str();
  gen->add_option("--rho", data.rho, "Shape/background correlation")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  gen->add_option("--size", data.size, "Image side")->capture_default_str();
  gen->add_option("--crop", data.crop, "Training crop side")->capture_default_str();
  gen->add_option("--noise", data.noise, "Pixel noise amplitude")->capture_default_str();
  gen->add_option("--min-radius", data.min_radius)->capture_default_str();
  gen->add_option("--max-radius", data.max_radius)->capture_default_str();
  gen->add_flag("--context-shapes", data.context_shapes, "Draw unlabelled shapes on context images");

  auto* train_cmd = app.add_subcommand("train", "Train one adversarial network");
  add_common(train_cmd, c);
  add_train_flags(train_cmd, t, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "Train over a grid of alphas and repeat seeds");
  add_common(sweep_cmd, c);
  add_train_flags(sweep_cmd, t, true);
  sweep_cmd->remove_option(sweep_cmd->get_option("--alpha-max"));
  sweep_cmd->add_option("--alphas", alphas, "Comma-separated alphas")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--repeats", repeats, "Seeds per alpha: seed, seed+1, ...")->capture_default_str();
  sweep_cmd->add_option("--jobs", jobs, "Worker threads; results do not depend on it")->capture_default_str();

  auto* probe_cmd = app.add_subcommand("probe", "Certify a saved model with a fresh probe");
  add_common(probe_cmd, c);
  add_data_input(probe_cmd, t);
  probe_cmd->add_option("--model", model, "Checkpoint")->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--probe-epochs", probe.epochs)->capture_default_str();
  probe_cmd->add_option("--probe-lr", probe.lr)->capture_default_str();

  auto* act_cmd = app.add_subcommand("actmap", "Write activation maps for a split");
  add_common(act_cmd, c);
  add_data_input(act_cmd, t);
  act_cmd->add_option("--model", model, "Checkpoint")->required()->check(CLI::ExistingFile);
  act_cmd->add_option("--split", split)->capture_default_str();
  act_cmd->add_option("--compare", compare, "Second checkpoint; selects the least-correlated maps")
      ->check(CLI::ExistingFile);
  act_cmd->add_option("--top-k", top_k, "How many least-correlated examples to keep")->capture_default_str();

  auto* cross_cmd = app.add_subcommand("cross-domain", "Train target-only and context-only CNNs and cross-evaluate");
  add_common(cross_cmd, c);
  add_train_flags(cross_cmd, t, false);

  auto* report_cmd = app.add_subcommand("report", "Render CSVs as text tables and SVG charts");
  add_common(report_cmd, c, false);
  report_cmd->add_option("--in", inputs, "CSV files")->required()->delimiter(',')->check(CLI::ExistingFile);

  auto* replay_cmd = app.add_subcommand("replay", "Rerun the command recorded in a manifest.json");
  replay_cmd->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", c.out, "Output directory (emptied first)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (gen->parsed()) cmd_gen_data(*gen, c, data);
  if (train_cmd->parsed()) cmd_train(*train_cmd, c, t);
  if (sweep_cmd->parsed()) cmd_sweep(*sweep_cmd, c, t, alphas, repeats, jobs);
  if (probe_cmd->parsed()) cmd_probe(*probe_cmd, c, t, model, probe);
  if (act_cmd->parsed()) cmd_actmap(*act_cmd, c, t, model, split, compare, top_k);
  if (cross_cmd->parsed()) cmd_cross_domain(*cross_cmd, c, t);
  if (report_cmd->parsed()) cmd_report(*report_cmd, c, inputs);
  if (replay_cmd->parsed()) return cmd_replay(manifest_path, c.out, argv[0]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
