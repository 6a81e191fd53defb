#include "boostaug/evalharness.hpp"

#include <cmath>
#include <cstdio>

#include "boostaug/errors.hpp"
#include "boostaug/metrics.hpp"
#include "boostaug/parallel.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

NaiveBayesClassifier train_classifier(const Dataset& train, const Dataset& valid, const SurrogateTrainConfig& config,
                                      std::uint64_t) {
  // Naive Bayes has no stochastic component; the seed is accepted for
  // interface symmetry with trainable classifiers.
  config.validate();
  if (train.empty()) throw ConfigError("classifier training set is empty");
  return train_naive_bayes(train, valid, config);
}

EvalResult evaluate(const NaiveBayesClassifier& classifier, const Dataset& test) {
  if (test.empty()) throw ConfigError("test set is empty");
  const auto& labels = classifier.labels();
  std::vector<std::size_t> gold;
  std::vector<std::size_t> predicted;
  gold.reserve(test.size());
  predicted.reserve(test.size());
  for (const auto& ex : test.examples) {
    const auto idx = labels.index_of(ex.label);
    if (!idx) throw ConfigError("test label '" + ex.label + "' is unknown to the classifier");
    gold.push_back(*idx);
    auto tokens = tokenize(ex.text);
    for (auto& t : tokens) t = to_lower_ascii(t);
    predicted.push_back(classifier.predict(tokens));
  }
  const auto scores = score_predictions(gold, predicted, labels.size());
  EvalResult r;
  r.accuracy = scores.accuracy;
  r.macro_f1 = scores.macro_f1;
  r.per_class_f1 = scores.per_class_f1;
  r.n_test = test.size();
  return r;
}

std::string_view to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::BoostAug: return "boostaug";
    case SweepMode::MonoAug: return "monoaug";
    case SweepMode::RawBackend: return "raw_backend";
    case SweepMode::None: return "none";
  }
  return "none";
}

SweepMode parse_sweep_mode(std::string_view name) {
  for (auto m : {SweepMode::BoostAug, SweepMode::MonoAug, SweepMode::RawBackend, SweepMode::None})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown sweep mode '" + std::string(name) + "' (expected boostaug, monoaug, raw_backend or none)");
}

void SweepConfig::validate() const {
  base.validate();
  if (n_values.empty()) throw ConfigError("sweep needs at least one n value");
  for (auto n : n_values)
    if (n == 0) throw ConfigError("sweep n values must be positive");
  if (modes.empty()) throw ConfigError("sweep needs at least one mode");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (jobs == 0) throw ConfigError("jobs must be positive");
}

double standard_error(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return sd / std::sqrt(static_cast<double>(values.size()));
}

namespace {

struct Cell {
  SweepMode mode;
  std::size_t n;
  std::uint64_t seed;
};

EvalResult run_cell(const Dataset& train, const Dataset& test, const SweepConfig& config,
                    const BackendResources& resources, const Cell& cell) {
  BoostRunConfig run = config.base;
  run.seed = cell.seed;
  run.filter.keep_per_example = cell.n;
  run.jobs = 1;

  Dataset augmented;
  switch (cell.mode) {
    case SweepMode::BoostAug:
      run.mode = BoostMode::Cross;
      augmented = augment(train, run, resources, lightweight_factory(run.train, run.seed)).dataset;
      break;
    case SweepMode::MonoAug:
      run.mode = BoostMode::Mono;
      augmented = augment(train, run, resources, lightweight_factory(run.train, run.seed)).dataset;
      break;
    case SweepMode::RawBackend: augmented = raw_augment(train, run, resources).dataset; break;
    case SweepMode::None: augmented = train; break;
  }
  const Dataset no_valid{{}, augmented.labels, augmented.task};
  auto classifier = train_classifier(augmented, no_valid, run.train, cell.seed);
  auto result = evaluate(classifier, test);
  result.n_train = augmented.size();
  result.seed = cell.seed;
  return result;
}

}  // namespace

SweepResult sweep_n(const Dataset& train, const Dataset& test, const SweepConfig& config,
                    const BackendResources& resources) {
  config.validate();
  std::vector<Cell> cells;
  for (auto mode : config.modes)
    for (auto n : config.n_values)
      for (auto seed : config.seeds) cells.push_back({mode, n, seed});

  std::vector<EvalResult> results(cells.size());
  parallel_for(cells.size(), config.jobs,
               [&](std::size_t i) { results[i] = run_cell(train, test, config, resources, cells[i]); });

  SweepResult out;
  std::size_t at = 0;
  for (auto mode : config.modes) {
    for (auto n : config.n_values) {
      SweepRow row;
      row.mode = mode;
      row.n = n;
      std::vector<double> acc, f1;
      for (std::size_t s = 0; s < config.seeds.size(); ++s, ++at) {
        acc.push_back(results[at].accuracy);
        f1.push_back(results[at].macro_f1);
        row.runs.push_back(results[at]);
      }
      for (double v : acc) row.acc_mean += v;
      for (double v : f1) row.f1_mean += v;
      row.acc_mean /= static_cast<double>(acc.size());
      row.f1_mean /= static_cast<double>(f1.size());
      row.acc_stderr = standard_error(acc);
      row.f1_stderr = standard_error(f1);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

std::string sweep_tsv(const SweepResult& result) {
  std::string out = "mode\tn\tacc_mean\tacc_stderr\tf1_mean\tf1_stderr\n";
  char buf[160];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof buf, "\t%zu\t%.6f\t%.6f\t%.6f\t%.6f\n", row.n, row.acc_mean, row.acc_stderr, row.f1_mean,
                  row.f1_stderr);
    out += to_string(row.mode);
    out += buf;
  }
  return out;
}

}  // namespace boostaug
