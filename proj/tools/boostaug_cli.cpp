#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "boostaug/boost.hpp"
#include "boostaug/corpus.hpp"
#include "boostaug/errors.hpp"
#include "boostaug/evalharness.hpp"
#include "boostaug/run_config.hpp"
#include "boostaug/shiftmetrics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace boostaug;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::map<std::string, std::string> flags;
  std::string config_path;
};

void add_config_options(CLI::App& sub, Common& common) {
  sub.add_option("--config", common.config_path, "JSON config file (flat keys named like the flags)");
  for (const auto& spec : run_config_options()) {
    std::string help = spec.help;
    if (spec.env) help += " [env " + *spec.env + "]";
    sub.add_option_function<std::string>(
        "--" + spec.name, [&common, name = spec.name](const std::string& v) { common.flags[name] = v; }, help);
  }
}

RunConfig resolve(const Common& common, const json& defaults = json::object()) {
  ConfigLayers layers;
  if (!common.config_path.empty()) layers.file = load_config_file(common.config_path);
  layers.env = config_from_environment();
  layers.flags = common.flags;
  return resolve_run_config(layers, defaults);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

Dataset read_input(const std::string& path, Task task) {
  if (!fs::is_regular_file(path)) throw ConfigError("input file not found: " + path);
  return load_dataset(path, task);
}

/// Scratch directory for external scorer fold files, removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() / ("boostaug-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

SurrogateFactory make_factory(const RunConfig& config, const ScratchDir& scratch) {
  switch (config.scorer.kind) {
    case ScorerSpec::Kind::Lightweight: return lightweight_factory(config.boost.train, config.boost.seed);
    case ScorerSpec::Kind::Exec: return external_factory(config.scorer.target, config.boost.train, scratch.path(), config.scorer_timeout);
    case ScorerSpec::Kind::Http: {
      auto endpoint = config.scorer.target;
      if (!endpoint.starts_with("http://")) endpoint = "http://" + endpoint;
      return external_factory(endpoint, config.boost.train, scratch.path(), config.scorer_timeout);
    }
  }
  return lightweight_factory(config.boost.train, config.boost.seed);
}

std::string provenance_tsv(const AugmentedDataset& result) {
  std::string out = "output_index\torigin_id\tbackend\tfold_iteration\tdraw_index\tperplexity\tconfidence\tpredicted_label\n";
  for (const auto& p : result.provenance) {
    json conf = p.confidence;
    out += std::to_string(p.output_index) + '\t' + std::to_string(p.origin_id) + '\t' + p.backend + '\t' +
           std::to_string(p.fold_iteration) + '\t' + std::to_string(p.draw_index) + '\t' + json(p.perplexity).dump() +
           '\t' + conf.dump() + '\t' + p.predicted_label + '\n';
  }
  return out;
}

// --- augment ------------------------------------------------------------------------

struct AugmentArgs {
  std::string input, out, report, provenance;
  bool compare_cross = false;
};

int cmd_augment(const Common& common, const AugmentArgs& args) {
  const auto config = resolve(common);
  if (config.n_values.size() != 1) throw ConfigError("augment takes a single --n value");
  const auto dataset = read_input(args.input, config.task);
  const auto resources = load_resources(config);
  ScratchDir scratch;
  const auto factory = make_factory(config, scratch);

  auto result = augment(dataset, config.boost, resources, factory);
  if (args.compare_cross && config.boost.mode == BoostMode::Mono) {
    auto cross_cfg = config.boost;
    cross_cfg.mode = BoostMode::Cross;
    const auto cross = augment(dataset, cross_cfg, resources, factory);
    result.report.survivor_rate_delta = result.report.survivor_rate() - cross.report.survivor_rate();
  }
  result.report.config_echo = config.echo();

  write_dataset(result.dataset, args.out);
  if (!args.report.empty()) write_text(args.report, to_json(result.report).dump(2) + "\n");
  if (!args.provenance.empty()) write_text(args.provenance, provenance_tsv(result));
  return 0;
}

// --- diagnose ------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string train, augmented, test, a, b, report, points;
};

int cmd_diagnose(const Common& common, const DiagnoseArgs& args) {
  const auto config = resolve(common);
  std::vector<DiagnoseInput> inputs;
  std::vector<std::pair<std::string, std::string>> pairs;
  if (!args.a.empty() || !args.b.empty()) {
    if (args.a.empty() || args.b.empty()) throw ConfigError("--a and --b must be given together");
    inputs.push_back({"a", read_input(args.a, config.task)});
    inputs.push_back({"b", read_input(args.b, config.task)});
    pairs.emplace_back("a", "b");
  } else {
    if (args.train.empty() || args.test.empty()) throw ConfigError("diagnose needs --train and --test, or --a and --b");
    inputs.push_back({"train", read_input(args.train, config.task)});
    inputs.push_back({"test", read_input(args.test, config.task)});
    pairs.emplace_back("train", "test");
    if (!args.augmented.empty()) {
      inputs.push_back({"augmented", read_input(args.augmented, config.task)});
      pairs.emplace_back("augmented", "test");
    }
  }
  const auto featurizer = LexicalFeaturizer::fit(inputs.front().dataset, config.max_features);
  const auto result = diagnose(inputs, featurizer, pairs, config.embedding, config.boost.seed);

  json report = to_json(result);
  report["config_echo"] = config.echo();
  const std::string text = report.dump(2) + "\n";
  if (args.report.empty()) std::cout << text;
  else write_text(args.report, text);
  if (!args.points.empty()) write_text(args.points, points_tsv(result));
  return 0;
}

// --- sweep --------------------------------------------------------------------------------

struct SweepArgs {
  std::string input, test, out;
};

int cmd_sweep(const Common& common, const SweepArgs& args) {
  const auto config = resolve(common, json{{"n", json::array({1, 2, 4, 8, 12})}});
  const auto train = read_input(args.input, config.task);
  const auto test = read_input(args.test, config.task);
  SweepConfig sweep;
  sweep.base = config.boost;
  sweep.n_values = config.n_values;
  sweep.modes = config.modes;
  for (std::size_t i = 0; i < config.seeds; ++i) sweep.seeds.push_back(config.boost.seed + i);
  sweep.jobs = config.boost.jobs;
  const auto result = sweep_n(train, test, sweep, load_resources(config));
  const auto tsv = sweep_tsv(result);
  if (args.out.empty()) std::cout << tsv;
  else write_text(args.out, tsv);
  return 0;
}

// --- eval ---------------------------------------------------------------------------------

struct EvalArgs {
  std::string train, valid, test, report;
};

int cmd_eval(const Common& common, const EvalArgs& args) {
  const auto config = resolve(common);
  const auto train = read_input(args.train, config.task);
  const auto test = read_input(args.test, config.task);
  Dataset valid{{}, train.labels, train.task};
  if (!args.valid.empty()) valid = read_input(args.valid, config.task);
  const auto classifier = train_classifier(train, valid, config.boost.train, config.boost.seed);
  auto result = evaluate(classifier, test);
  result.n_train = train.size();
  result.seed = config.boost.seed;

  std::printf("accuracy\t%.6f\nmacro_f1\t%.6f\n", result.accuracy, result.macro_f1);
  if (!args.report.empty()) {
    json j{{"accuracy", result.accuracy},         {"macro_f1", result.macro_f1}, {"per_class_f1", result.per_class_f1},
           {"labels", classifier.labels().tokens()}, {"n_train", result.n_train}, {"n_test", result.n_test},
           {"seed", result.seed},                 {"config_echo", config.echo()}};
    write_text(args.report, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"augment-to-filter text augmentation"};
  app.require_subcommand(1);
  Common common;

  AugmentArgs augment_args;
  auto* augment_cmd = app.add_subcommand("augment", "generate and filter augmentations of a dataset");
  augment_cmd->add_option("--input", augment_args.input, "training dataset")->required();
  augment_cmd->add_option("--out", augment_args.out, "augmented dataset to write")->required();
  augment_cmd->add_option("--report", augment_args.report, "run report (JSON)");
  augment_cmd->add_option("--provenance", augment_args.provenance, "per-survivor provenance (TSV)");
  augment_cmd->add_flag("--compare-cross", augment_args.compare_cross,
                        "in mono mode, also run cross-boosting and report the survivor-rate difference");
  add_config_options(*augment_cmd, common);

  DiagnoseArgs diagnose_args;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "feature-space shift between datasets");
  diagnose_cmd->add_option("--train", diagnose_args.train, "training dataset (featurizer vocabulary)");
  diagnose_cmd->add_option("--augmented", diagnose_args.augmented, "augmented dataset");
  diagnose_cmd->add_option("--test", diagnose_args.test, "reference dataset");
  diagnose_cmd->add_option("--a", diagnose_args.a, "first dataset of a single comparison");
  diagnose_cmd->add_option("--b", diagnose_args.b, "reference dataset of a single comparison");
  diagnose_cmd->add_option("--report", diagnose_args.report, "report (JSON); stdout when omitted");
  diagnose_cmd->add_option("--points", diagnose_args.points, "embedded points (TSV)");
  add_config_options(*diagnose_cmd, common);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "accuracy and macro-F1 against augmentations per example");
  sweep_cmd->add_option("--input", sweep_args.input, "training dataset")->required();
  sweep_cmd->add_option("--test", sweep_args.test, "test dataset")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "TSV to write; stdout when omitted");
  add_config_options(*sweep_cmd, common);

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "train the downstream classifier and score it");
  eval_cmd->add_option("--train", eval_args.train, "training dataset")->required();
  eval_cmd->add_option("--valid", eval_args.valid, "validation dataset for smoothing selection");
  eval_cmd->add_option("--test", eval_args.test, "test dataset")->required();
  eval_cmd->add_option("--report", eval_args.report, "result (JSON)");
  add_config_options(*eval_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*augment_cmd) return cmd_augment(common, augment_args);
    if (*diagnose_cmd) return cmd_diagnose(common, diagnose_args);
    if (*sweep_cmd) return cmd_sweep(common, sweep_args);
    if (*eval_cmd) return cmd_eval(common, eval_args);
  } catch (const ConfigError& e) {
    std::cerr << "boostaug: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "boostaug: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
