#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boostaug/corpus.hpp"
#include "boostaug/rng.hpp"
#include "boostaug/surrogate.hpp"

namespace boostaug {

enum class Strategy { Eda, Spelling, Split, EmbedSub };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

enum class EdaOp { SynonymReplace = 0, RandomInsert = 1, RandomSwap = 2, RandomDelete = 3 };

struct TransformConfig {
  double token_transform_prob = 0.1;
  Strategy strategy = Strategy::Eda;
  // Weights over synonym_replace, random_insert, random_swap, random_delete.
  std::array<double, 4> eda_op_weights{1.0, 1.0, 1.0, 1.0};
  std::size_t max_attempts = 10;
  bool protect_aspect = true;

  void validate() const;
};

/// word -> alternatives, as read from `word<TAB>alt1,alt2,...` lines.
/// Lookups try the word verbatim, then lowercased.
class WordTable {
 public:
  WordTable() = default;
  explicit WordTable(std::map<std::string, std::vector<std::string>> entries);

  const std::vector<std::string>* find(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

WordTable load_word_table(const std::filesystem::path& path);

/// Lexical resources the transforms draw from.
struct BackendResources {
  WordTable synonyms;
  WordTable misspellings;
};

struct AugmentationCandidate {
  std::string text;
  std::size_t origin_id = 0;
  std::string backend;
  std::size_t fold_iteration = 0;
  std::size_t draw_index = 0;
  bool identity = false;  // transform left the text unchanged
  std::optional<TokenSpan> aspect_span;

  std::optional<double> perplexity;
  std::optional<std::vector<double>> confidence;
  std::optional<std::string> predicted_label;

  bool scored() const noexcept { return perplexity && confidence && predicted_label; }
  double max_confidence() const;
};

/// Token sequence under transformation. Protected positions are the aspect
/// tokens; they are never edited, split or deleted and stay contiguous.
struct TokenState {
  std::vector<std::string> tokens;
  std::optional<TokenSpan> aspect;

  static TokenState from_example(const Example& example, bool protect_aspect);
  bool is_protected(std::size_t i) const { return aspect && i >= aspect->begin && i < aspect->end; }
  void insert(std::size_t at, std::string token);
  void erase(std::size_t at);
};

AugmentationCandidate eda_transform(const Example& example, const TransformConfig& config,
                                    const BackendResources& resources, Rng& rng);
AugmentationCandidate spelling_transform(const Example& example, const TransformConfig& config,
                                         const BackendResources& resources, Rng& rng);
AugmentationCandidate split_transform(const Example& example, const TransformConfig& config, Rng& rng);
/// Substitutes selected tokens with proposals from `proposer`, drawn
/// proportionally to proposal weight. No proposals leaves the token intact.
AugmentationCandidate embed_substitute_transform(const Example& example, const TransformConfig& config,
                                                 const SurrogateModel& proposer, Rng& rng);

/// One application of the configured strategy. `proposer` is required for embed_sub.
AugmentationCandidate transform(const Example& example, const TransformConfig& config,
                                const BackendResources& resources, const SurrogateModel* proposer, Rng& rng);

/// Up to `count` distinct candidates that differ from the original text, in
/// draw order, from at most max_attempts * count draws. Draw d uses a
/// generator seeded from (seed, example id, d).
std::vector<AugmentationCandidate> generate(const Example& example, std::size_t count, const TransformConfig& config,
                                            const BackendResources& resources, const SurrogateModel* proposer,
                                            std::uint64_t seed);

}  // namespace boostaug
