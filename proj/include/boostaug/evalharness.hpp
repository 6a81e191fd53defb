#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boostaug/boost.hpp"
#include "boostaug/surrogate.hpp"

namespace boostaug {

struct EvalResult {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;  // LabelSet order of the classifier
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

/// Downstream classifier: the naive-Bayes half of the lightweight scorer.
/// Throws ConfigError when a label of the set has no training example.
NaiveBayesClassifier train_classifier(const Dataset& train, const Dataset& valid, const SurrogateTrainConfig& config,
                                      std::uint64_t seed);

/// Test labels are matched to the classifier's labels by token. Throws
/// ConfigError on an empty test set or an unknown test label.
EvalResult evaluate(const NaiveBayesClassifier& classifier, const Dataset& test);

enum class SweepMode { BoostAug, MonoAug, RawBackend, None };

std::string_view to_string(SweepMode mode);
SweepMode parse_sweep_mode(std::string_view name);

struct SweepConfig {
  BoostRunConfig base;  // seed and keep_per_example are set per cell
  std::vector<std::size_t> n_values;
  std::vector<SweepMode> modes{SweepMode::BoostAug, SweepMode::MonoAug, SweepMode::RawBackend, SweepMode::None};
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;

  void validate() const;
};

struct SweepRow {
  SweepMode mode = SweepMode::None;
  std::size_t n = 0;
  double acc_mean = 0.0;
  double acc_stderr = 0.0;
  double f1_mean = 0.0;
  double f1_stderr = 0.0;
  std::vector<EvalResult> runs;  // one per seed, in seed order
};

struct SweepResult {
  std::vector<SweepRow> rows;  // mode-major, then n in the requested order
};

/// Standard error of the mean: sample standard deviation / sqrt(m); 0 for m = 1.
double standard_error(const std::vector<double>& values);

/// For each mode, n and seed: augment `train` (no augmentation for None),
/// train the downstream classifier on the result and evaluate on `test`.
SweepResult sweep_n(const Dataset& train, const Dataset& test, const SweepConfig& config,
                    const BackendResources& resources);

/// Header mode, n, acc_mean, acc_stderr, f1_mean, f1_stderr; one row per SweepRow.
std::string sweep_tsv(const SweepResult& result);

}  // namespace boostaug
