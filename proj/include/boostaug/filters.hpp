#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "boostaug/backends.hpp"
#include "boostaug/corpus.hpp"
#include "boostaug/surrogate.hpp"

namespace boostaug {

enum class FilterStage { Label, Perplexity, ConfidenceRank, ConfidenceThreshold };

std::string_view to_string(FilterStage stage);
FilterStage parse_filter_stage(std::string_view name);

enum class PerplexityMode { Absolute, Relative };

std::string_view to_string(PerplexityMode mode);
PerplexityMode parse_perplexity_mode(std::string_view name);

struct FilterConfig {
  /// Candidates need max confidence strictly above this.
  double confidence_threshold = 0.99;
  /// Absolute mode: candidates need perplexity strictly below this.
  double perplexity_limit = 5.0;
  PerplexityMode perplexity_mode = PerplexityMode::Absolute;
  /// Relative mode: candidates need perplexity below ratio * the median perplexity
  /// of the original examples being augmented.
  double relative_ratio = 1.5;
  std::size_t keep_per_example = 8;
  std::set<FilterStage> enabled{FilterStage::Label, FilterStage::Perplexity, FilterStage::ConfidenceRank,
                                FilterStage::ConfidenceThreshold};

  bool is_enabled(FilterStage stage) const { return enabled.contains(stage); }
  void validate() const;
};

/// Parses a comma-separated stage list ("label,perplexity").
std::set<FilterStage> parse_filter_stages(std::string_view list);

/// Keeps candidates whose predicted label equals `truth`.
std::vector<AugmentationCandidate> apply_label_constraint(std::vector<AugmentationCandidate> cands,
                                                          std::string_view truth);

/// `median_perplexity` is required in relative mode.
std::vector<AugmentationCandidate> apply_perplexity_filter(std::vector<AugmentationCandidate> cands,
                                                           const FilterConfig& config,
                                                           std::optional<double> median_perplexity = std::nullopt);

/// Sorts by max confidence descending, then perplexity ascending, then draw
/// order, and keeps the first `keep`.
std::vector<AugmentationCandidate> confidence_rank(std::vector<AugmentationCandidate> cands, std::size_t keep);

std::vector<AugmentationCandidate> apply_confidence_threshold(std::vector<AugmentationCandidate> cands,
                                                              const FilterConfig& config);

/// Stage-by-stage removal counts for one example.
struct FilterTrace {
  std::size_t generated = 0;
  std::size_t removed_label = 0;
  std::size_t removed_perplexity = 0;
  std::size_t removed_rank = 0;
  std::size_t removed_threshold = 0;
  std::size_t survived = 0;

  std::size_t removed() const noexcept {
    return removed_label + removed_perplexity + removed_rank + removed_threshold;
  }
  FilterTrace& operator+=(const FilterTrace& other);
  bool operator==(const FilterTrace&) const = default;
};

struct FilterOutcome {
  std::vector<AugmentationCandidate> survivors;
  FilterTrace trace;
};

/// Fills in the candidate's scores from `model`.
void score_candidate(AugmentationCandidate& cand, const Example& origin, const SurrogateModel& model);

/// Scores every candidate once, then runs label -> perplexity -> rank ->
/// threshold, skipping disabled stages. With ranking disabled the pool is
/// truncated to keep_per_example in draw order instead.
FilterOutcome filter_chain(const Example& example, std::vector<AugmentationCandidate> raw,
                           const SurrogateModel& model, const FilterConfig& config,
                           std::optional<double> median_perplexity = std::nullopt);

/// The same chain over candidates that already carry scores.
FilterOutcome filter_scored(const Example& example, std::vector<AugmentationCandidate> scored,
                            const FilterConfig& config, std::optional<double> median_perplexity = std::nullopt);

}  // namespace boostaug
