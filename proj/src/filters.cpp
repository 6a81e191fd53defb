#include "boostaug/filters.hpp"

#include <algorithm>
#include <cmath>

#include "boostaug/errors.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

std::string_view to_string(FilterStage stage) {
  switch (stage) {
    case FilterStage::Label: return "label";
    case FilterStage::Perplexity: return "perplexity";
    case FilterStage::ConfidenceRank: return "confidence_rank";
    case FilterStage::ConfidenceThreshold: return "confidence_threshold";
  }
  return "unknown";
}

FilterStage parse_filter_stage(std::string_view name) {
  for (auto s : {FilterStage::Label, FilterStage::Perplexity, FilterStage::ConfidenceRank,
                 FilterStage::ConfidenceThreshold})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown filter stage '" + std::string(name) +
                    "' (expected label, perplexity, confidence_rank or confidence_threshold)");
}

std::set<FilterStage> parse_filter_stages(std::string_view list) {
  std::set<FilterStage> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const auto item = trim(list.substr(0, comma));
    if (!item.empty()) out.insert(parse_filter_stage(item));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

std::string_view to_string(PerplexityMode mode) { return mode == PerplexityMode::Absolute ? "absolute" : "relative"; }

PerplexityMode parse_perplexity_mode(std::string_view name) {
  if (name == "absolute") return PerplexityMode::Absolute;
  if (name == "relative") return PerplexityMode::Relative;
  throw ConfigError("unknown perplexity mode '" + std::string(name) + "'");
}

void FilterConfig::validate() const {
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
    throw ConfigError("confidence_threshold must lie in [0,1]");
  if (!(perplexity_limit > 0.0)) throw ConfigError("perplexity_limit must be positive");
  if (!(relative_ratio > 0.0) || !std::isfinite(relative_ratio)) throw ConfigError("relative_ratio must be positive");
  if (keep_per_example == 0) throw ConfigError("keep_per_example must be at least 1");
}

FilterTrace& FilterTrace::operator+=(const FilterTrace& o) {
  generated += o.generated;
  removed_label += o.removed_label;
  removed_perplexity += o.removed_perplexity;
  removed_rank += o.removed_rank;
  removed_threshold += o.removed_threshold;
  survived += o.survived;
  return *this;
}

namespace {

void require_scored(const std::vector<AugmentationCandidate>& cands, const char* stage) {
  for (const auto& c : cands)
    if (!c.scored())
      throw ConfigError(std::string(stage) + ": candidate " + std::to_string(c.origin_id) + "/" +
                        std::to_string(c.draw_index) + " carries no scores");
}

}  // namespace

std::vector<AugmentationCandidate> apply_label_constraint(std::vector<AugmentationCandidate> cands,
                                                          std::string_view truth) {
  require_scored(cands, "label constraint");
  std::erase_if(cands, [&](const AugmentationCandidate& c) { return *c.predicted_label != truth; });
  return cands;
}

std::vector<AugmentationCandidate> apply_perplexity_filter(std::vector<AugmentationCandidate> cands,
                                                           const FilterConfig& config,
                                                           std::optional<double> median_perplexity) {
  require_scored(cands, "perplexity filter");
  double limit = config.perplexity_limit;
  if (config.perplexity_mode == PerplexityMode::Relative) {
    if (!median_perplexity) throw ConfigError("relative perplexity mode needs the training median perplexity");
    limit = config.relative_ratio * *median_perplexity;
  }
  std::erase_if(cands, [&](const AugmentationCandidate& c) { return !(*c.perplexity < limit); });
  return cands;
}

std::vector<AugmentationCandidate> confidence_rank(std::vector<AugmentationCandidate> cands, std::size_t keep) {
  require_scored(cands, "confidence ranking");
  std::stable_sort(cands.begin(), cands.end(), [](const AugmentationCandidate& a, const AugmentationCandidate& b) {
    const double ca = a.max_confidence();
    const double cb = b.max_confidence();
    if (ca != cb) return ca > cb;
    if (*a.perplexity != *b.perplexity) return *a.perplexity < *b.perplexity;
    return a.draw_index < b.draw_index;
  });
  if (cands.size() > keep) cands.resize(keep);
  return cands;
}

std::vector<AugmentationCandidate> apply_confidence_threshold(std::vector<AugmentationCandidate> cands,
                                                              const FilterConfig& config) {
  require_scored(cands, "confidence threshold");
  std::erase_if(cands, [&](const AugmentationCandidate& c) { return !(c.max_confidence() > config.confidence_threshold); });
  return cands;
}

void score_candidate(AugmentationCandidate& cand, const Example& origin, const SurrogateModel& model) {
  std::optional<std::string_view> aspect;
  if (origin.aspect) aspect = *origin.aspect;
  try {
    auto triple = model.score(cand.text, aspect);
    cand.perplexity = triple.perplexity;
    cand.confidence = std::move(triple.confidence);
    cand.predicted_label = std::move(triple.label);
  } catch (const ScorerError& e) {
    throw ScorerError("scoring candidate " + std::to_string(cand.origin_id) + "/" + std::to_string(cand.draw_index) +
                          " failed: " + e.what(),
                      e.raw());
  }
}

FilterOutcome filter_scored(const Example& example, std::vector<AugmentationCandidate> scored,
                            const FilterConfig& config, std::optional<double> median_perplexity) {
  FilterOutcome out;
  out.trace.generated = scored.size();
  auto step = [](std::vector<AugmentationCandidate>& cands, std::size_t& removed, auto&& stage) {
    const auto before = cands.size();
    cands = stage(std::move(cands));
    removed = before - cands.size();
  };
  auto cands = std::move(scored);
  require_scored(cands, "filter chain");
  if (config.is_enabled(FilterStage::Label))
    step(cands, out.trace.removed_label, [&](auto c) { return apply_label_constraint(std::move(c), example.label); });
  if (config.is_enabled(FilterStage::Perplexity))
    step(cands, out.trace.removed_perplexity,
         [&](auto c) { return apply_perplexity_filter(std::move(c), config, median_perplexity); });
  if (config.is_enabled(FilterStage::ConfidenceRank)) {
    step(cands, out.trace.removed_rank, [&](auto c) { return confidence_rank(std::move(c), config.keep_per_example); });
  } else {
    step(cands, out.trace.removed_rank, [&](auto c) {
      if (c.size() > config.keep_per_example) c.resize(config.keep_per_example);
      return c;
    });
  }
  if (config.is_enabled(FilterStage::ConfidenceThreshold))
    step(cands, out.trace.removed_threshold,
         [&](auto c) { return apply_confidence_threshold(std::move(c), config); });
  out.trace.survived = cands.size();
  out.survivors = std::move(cands);
  return out;
}

FilterOutcome filter_chain(const Example& example, std::vector<AugmentationCandidate> raw,
                           const SurrogateModel& model, const FilterConfig& config,
                           std::optional<double> median_perplexity) {
  config.validate();
  for (auto& c : raw) score_candidate(c, example, model);
  return filter_scored(example, std::move(raw), config, median_perplexity);
}

}  // namespace boostaug
