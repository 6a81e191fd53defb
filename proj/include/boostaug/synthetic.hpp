#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boostaug/backends.hpp"
#include "boostaug/corpus.hpp"

namespace boostaug {

/// Templated two-class sentiment corpus. Each sentence carries polarity
/// keywords of its class, optionally a keyword of the other class
/// as a distractor, and neutral filler.
struct SyntheticConfig {
  std::size_t n_train = 200;
  std::size_t n_test = 200;
  std::uint64_t seed = 1;
  /// Keywords per class. Training sentences use only the first
  /// `train_keywords` of them; test sentences use all.
  std::size_t keywords_per_class = 8;
  std::size_t train_keywords = 4;
  /// 1 or 2 keywords of the sentence's class; with 1 the second slot holds a neutral word.
  std::size_t keywords_per_sentence = 2;
  /// Probability that a sentence also mentions a keyword of the other class.
  double distractor_rate = 0.0;
  /// Probability that a training label is flipped.
  double label_noise = 0.0;
};

struct SyntheticCorpus {
  Dataset train;
  Dataset test;
  std::vector<std::string> positive_keywords;
  std::vector<std::string> negative_keywords;
  /// Keyword -> one same-class keyword, filler -> filler of the same group.
  WordTable synonyms;
  /// Keyword -> its antonym (same index, other class) and nothing else.
  WordTable antonyms;
  /// synonyms plus, for each keyword, its antonym.
  WordTable noisy_synonyms;
  WordTable misspellings;

  /// The antonym of a polarity keyword, or empty for other words.
  std::string antonym_of(const std::string& keyword) const;
  /// Positive and negative keyword occurrences in `text`.
  std::pair<std::size_t, std::size_t> keyword_counts(const std::string& text) const;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config);

}  // namespace boostaug
