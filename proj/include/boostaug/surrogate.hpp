#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "boostaug/corpus.hpp"

namespace boostaug {

/// Perplexity, class posterior and argmax label of one text.
struct ScoreTriple {
  double perplexity = 1.0;
  std::vector<double> confidence;
  std::string label;

  /// Scalar confidence used by the filters: the largest posterior entry.
  double max_confidence() const;
  bool operator==(const ScoreTriple&) const = default;
};

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax_lowest(const std::vector<double>& values);

/// Throws ScorerError unless `triple` satisfies the contract against `labels`:
/// finite perplexity >= 1, one probability per label in [0,1] summing to 1
/// within `sum_tolerance`, and a label that attains the maximum.
void check_score_triple(const ScoreTriple& triple, const LabelSet& labels, double sum_tolerance = 1e-9);

enum class CheckpointMetric { Accuracy, MacroF1 };

std::string_view to_string(CheckpointMetric metric);
CheckpointMetric parse_checkpoint_metric(std::string_view name);

struct SurrogateTrainConfig {
  // Forwarded to external scorers; the lightweight scorer does not use them.
  double learning_rate = 1e-5;
  std::size_t batch_size = 16;
  std::size_t max_sequence_length = 80;
  double l2_lambda = 1e-8;
  std::size_t max_epochs = 5;

  CheckpointMetric checkpoint_metric = CheckpointMetric::Accuracy;
  std::size_t ngram_order = 2;
  double smoothing_alpha = 1.0;

  void validate() const;
};

struct TrainProvenance {
  std::optional<std::size_t> fold_iteration;
  std::vector<std::size_t> train_ids;  // ids in the dataset the run was started on
  std::optional<double> validation_metric;
  std::string selection;  // human-readable summary of the chosen settings
};

struct Proposal {
  std::string token;
  double weight = 0.0;
};

/// Scorer contract. Implementations must allow concurrent score() calls.
class SurrogateModel {
 public:
  virtual ~SurrogateModel() = default;

  virtual const LabelSet& labels() const = 0;
  virtual ScoreTriple score(std::string_view text, std::optional<std::string_view> aspect) const = 0;

  /// Replacement candidates for tokens[position]; empty when unsupported.
  virtual std::vector<Proposal> propose(const std::vector<std::string>& tokens, std::size_t position) const;
  virtual bool offers_proposals() const { return false; }

  const TrainProvenance& provenance() const noexcept { return provenance_; }
  void set_provenance(TrainProvenance p) { provenance_ = std::move(p); }

 private:
  TrainProvenance provenance_;
};

/// Additively smoothed n-gram model over lowercased tokens. Histories are
/// padded with begin markers; the outcome vocabulary is the training
/// vocabulary plus an OOV symbol and an end marker.
class NgramLanguageModel {
 public:
  NgramLanguageModel(std::size_t order, double alpha);

  /// Adds words to the vocabulary without counting them.
  void add_vocabulary(const std::vector<std::string>& words);
  /// Adds the sentence's words to the vocabulary and counts its n-grams.
  void observe(const std::vector<std::string>& tokens);

  /// p(token i | its history) for every token of the sentence.
  std::vector<double> conditionals(const std::vector<std::string>& tokens) const;
  /// exp(-mean ln p) over the sentence's tokens. Throws ConfigError on an empty sentence.
  double perplexity(const std::vector<std::string>& tokens) const;
  /// Token-weighted perplexity over many sentences.
  double corpus_perplexity(const std::vector<std::vector<std::string>>& sentences) const;

  std::size_t order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  /// Vocabulary size including the OOV symbol and the end marker.
  std::size_t effective_vocabulary() const noexcept { return vocab_.size() + 2; }
  bool in_vocabulary(std::string_view word) const;

 private:
  using Id = std::uint32_t;
  struct Counts {
    std::uint64_t total = 0;
    std::unordered_map<Id, std::uint64_t> next;
  };

  Id id_of(const std::string& lowered) const;
  std::vector<Id> encode(const std::vector<std::string>& tokens) const;

  std::size_t order_;
  double alpha_;
  std::unordered_map<std::string, Id> vocab_;
  std::map<std::vector<Id>, Counts> counts_;
};

/// Multinomial naive Bayes over lowercased unigram counts with additive
/// smoothing and maximum-likelihood class priors. Unseen words are ignored.
class NaiveBayesClassifier {
 public:
  NaiveBayesClassifier(LabelSet labels, double alpha);

  void observe(const std::vector<std::string>& tokens, std::size_t label_index);

  /// Normalised class posterior. Throws ConfigError if some label was never observed.
  std::vector<double> posterior(const std::vector<std::string>& tokens) const;
  std::size_t predict(const std::vector<std::string>& tokens) const;

  const LabelSet& labels() const noexcept { return labels_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t vocabulary_size() const noexcept { return vocab_.size(); }

 private:
  LabelSet labels_;
  double alpha_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<std::uint64_t> doc_counts_;
  std::vector<std::uint64_t> token_totals_;
  std::vector<std::unordered_map<std::size_t, std::uint64_t>> token_counts_;
};

/// Distributional neighbours from left/right co-occurrence counts; similarity
/// is the cosine between context vectors.
class CooccurrenceNeighbors {
 public:
  CooccurrenceNeighbors() = default;
  explicit CooccurrenceNeighbors(const std::vector<std::vector<std::string>>& sentences,
                                 std::size_t max_neighbors = 8);

  /// Up to max_neighbors words with positive similarity, best first, ties by word.
  std::vector<Proposal> neighbors(std::string_view word) const;
  bool empty() const noexcept { return contexts_.empty(); }

 private:
  using Context = std::map<std::string, double>;
  std::size_t max_neighbors_ = 8;
  std::map<std::string, Context> contexts_;
  std::map<std::string, double> norms_;
  std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::map<std::string, std::vector<Proposal>>> cache_ =
      std::make_shared<std::map<std::string, std::vector<Proposal>>>();
};

/// Built-in scorer: n-gram pseudo-perplexity plus naive-Bayes confidence.
class LightweightModel final : public SurrogateModel {
 public:
  LightweightModel(NgramLanguageModel lm, NaiveBayesClassifier classifier, CooccurrenceNeighbors neighbors);

  const LabelSet& labels() const override { return classifier_.labels(); }
  ScoreTriple score(std::string_view text, std::optional<std::string_view> aspect) const override;
  std::vector<Proposal> propose(const std::vector<std::string>& tokens, std::size_t position) const override;
  bool offers_proposals() const override { return true; }

  const NgramLanguageModel& language_model() const noexcept { return lm_; }
  const NaiveBayesClassifier& classifier() const noexcept { return classifier_; }

 private:
  NgramLanguageModel lm_;
  NaiveBayesClassifier classifier_;
  CooccurrenceNeighbors neighbors_;
};

/// Smoothing values tried during validation-based selection.
inline constexpr double kSmoothingGrid[] = {0.1, 0.5, 1.0};

/// Fits the naive-Bayes half alone, choosing smoothing on `valid` when it is non-empty.
NaiveBayesClassifier train_naive_bayes(const Dataset& train, const Dataset& valid, const SurrogateTrainConfig& config,
                                       std::optional<double>* validation_metric = nullptr);

/// Fits the lightweight scorer. With a non-empty `valid`, the classifier
/// smoothing is chosen by the checkpoint metric and the n-gram order and
/// smoothing by validation perplexity; otherwise the configured values are used.
std::unique_ptr<LightweightModel> train_lightweight(const Dataset& train, const Dataset& valid,
                                                    const SurrogateTrainConfig& config, std::uint64_t seed);

/// Throws ConfigError if the text has no tokens.
double pseudo_perplexity(const SurrogateModel& model, std::string_view text);
std::vector<double> confidence(const SurrogateModel& model, std::string_view text,
                               std::optional<std::string_view> aspect = std::nullopt);

/// Accuracy or macro-F1 of a classifier over a labelled dataset.
double classification_metric(const NaiveBayesClassifier& classifier, const Dataset& data, CheckpointMetric metric);

}  // namespace boostaug
