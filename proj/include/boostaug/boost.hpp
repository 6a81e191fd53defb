#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boostaug/backends.hpp"
#include "boostaug/corpus.hpp"
#include "boostaug/filters.hpp"
#include "boostaug/surrogate.hpp"

namespace boostaug {

enum class BoostMode { Cross, Mono };

std::string_view to_string(BoostMode mode);
BoostMode parse_boost_mode(std::string_view name);

struct BoostRunConfig {
  std::size_t k = 5;
  std::uint64_t seed = 42;
  TransformConfig transform;
  FilterConfig filter;
  SurrogateTrainConfig train;
  BoostMode mode = BoostMode::Cross;
  std::size_t pool_multiplier = 2;
  bool include_originals = true;
  std::size_t jobs = 1;

  void validate() const;
};

nlohmann::json to_json(const BoostRunConfig& config);

/// Builds the surrogate for one iteration from its training and validation folds.
using SurrogateFactory =
    std::function<std::unique_ptr<SurrogateModel>(const Dataset& train, const Dataset& valid, std::size_t iteration)>;

SurrogateFactory lightweight_factory(const SurrogateTrainConfig& config, std::uint64_t seed);

/// Starts one external scorer per iteration. Before launch, `{train}`,
/// `{valid}` and `{config}` in the command are replaced by paths of files
/// holding that iteration's folds and the training settings (JSON), and
/// `{iteration}` by the iteration index. Files go under `work_dir`.
SurrogateFactory external_factory(std::string command_template, const SurrogateTrainConfig& config,
                                  std::filesystem::path work_dir,
                                  std::chrono::milliseconds timeout = std::chrono::milliseconds(30000));

struct ProvenanceRecord {
  std::size_t output_index = 0;  // id of the materialised example
  std::size_t origin_id = 0;
  std::string backend;
  std::size_t fold_iteration = 0;
  std::size_t draw_index = 0;
  double perplexity = 0.0;
  std::vector<double> confidence;
  std::string predicted_label;
};

struct IterationReport {
  std::size_t iteration = 0;
  std::optional<std::size_t> boost_fold;
  std::optional<std::size_t> valid_fold;
  std::vector<std::size_t> train_folds;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::size_t n_boost = 0;
  std::optional<double> validation_metric;
  std::string selection;
  std::optional<double> median_perplexity;
  FilterTrace counts;
};

struct ExampleReport {
  std::size_t origin_id = 0;
  std::size_t fold_iteration = 0;
  FilterTrace counts;
};

struct RunReport {
  BoostMode mode = BoostMode::Cross;
  nlohmann::json config_echo;
  std::vector<std::string> warnings;
  std::vector<IterationReport> per_iteration;
  std::vector<ExampleReport> per_example;  // ascending origin id
  FilterTrace totals;
  std::size_t output_size = 0;
  std::optional<double> survivor_rate_delta;  // this run's survivor rate minus a reference run's

  double survivor_rate() const;
};

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

struct AugmentedDataset {
  Dataset dataset;  // originals (when included) and survivors in canonical order
  std::vector<ProvenanceRecord> provenance;
  /// Ids of the examples each iteration's surrogate was trained on.
  std::vector<std::vector<std::size_t>> iteration_train_ids;
  RunReport report;
};

/// k-fold cross-boosting: each fold is augmented under a surrogate trained on
/// k-2 other folds and checkpoint-selected on the remaining one.
AugmentedDataset boost_augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources,
                               const SurrogateFactory& factory);

/// MonoAug: one surrogate trained on the whole dataset filters every example.
AugmentedDataset mono_augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources,
                              const SurrogateFactory& factory);

/// Dispatches on config.mode.
AugmentedDataset augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources,
                         const SurrogateFactory& factory);

/// No-filter baseline: the first keep_per_example backend candidates of each
/// example. Trains a lightweight proposer only for the embed_sub backend.
AugmentedDataset raw_augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources);

/// Surviving candidates whose origin was in the training folds of the
/// surrogate that scored them. Empty for every cross-boosting run.
std::vector<ProvenanceRecord> overlap_violations(const AugmentedDataset& result);

/// Per-example summary of the run.
RunReport run_report(const AugmentedDataset& result);

}  // namespace boostaug
