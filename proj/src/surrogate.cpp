#include "boostaug/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "boostaug/errors.hpp"
#include "boostaug/metrics.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

namespace {

std::vector<std::string> lowered_tokens(std::string_view text) {
  auto tokens = tokenize(text);
  for (auto& t : tokens) t = to_lower_ascii(t);
  return tokens;
}

std::vector<std::vector<std::string>> lowered_sentences(const Dataset& data) {
  std::vector<std::vector<std::string>> out;
  out.reserve(data.size());
  for (const auto& ex : data.examples) out.push_back(lowered_tokens(ex.text));
  return out;
}

void require_all_labels(const Dataset& train) {
  std::vector<bool> seen(train.labels.size(), false);
  for (const auto& ex : train.examples) {
    auto idx = train.labels.index_of(ex.label);
    if (!idx) throw ConfigError("training label '" + ex.label + "' not in label set");
    seen[*idx] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ConfigError("label '" + train.labels[i] + "' has no training examples");
}

std::vector<double> softmax(const std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += out[i] = std::exp(logits[i] - peak);
  for (auto& v : out) v /= total;
  return out;
}

// Preference among equally good smoothing values: the configured one, then the smaller.
bool prefer_alpha(double candidate, double incumbent, double configured) {
  const double dc = std::abs(candidate - configured);
  const double di = std::abs(incumbent - configured);
  return dc < di || (dc == di && candidate < incumbent);
}

}  // namespace

double ScoreTriple::max_confidence() const {
  return confidence.empty() ? 0.0 : *std::max_element(confidence.begin(), confidence.end());
}

std::size_t argmax_lowest(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

void check_score_triple(const ScoreTriple& triple, const LabelSet& labels, double sum_tolerance) {
  if (!std::isfinite(triple.perplexity) || triple.perplexity < 1.0)
    throw ScorerError("perplexity " + std::to_string(triple.perplexity) + " is not a finite value >= 1");
  if (triple.confidence.size() != labels.size())
    throw ScorerError("confidence has " + std::to_string(triple.confidence.size()) + " entries, expected " +
                      std::to_string(labels.size()));
  double total = 0.0;
  for (double p : triple.confidence) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw ScorerError("confidence entry " + std::to_string(p) + " outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > sum_tolerance)
    throw ScorerError("confidence sums to " + std::to_string(total) + ", not 1");
  const auto idx = labels.index_of(triple.label);
  if (!idx) throw ScorerError("predicted label '" + triple.label + "' not in label set");
  if (triple.confidence[*idx] < triple.max_confidence())
    throw ScorerError("predicted label '" + triple.label + "' does not have the maximal confidence");
}

std::string_view to_string(CheckpointMetric metric) {
  return metric == CheckpointMetric::Accuracy ? "accuracy" : "macro_f1";
}

CheckpointMetric parse_checkpoint_metric(std::string_view name) {
  if (name == "accuracy") return CheckpointMetric::Accuracy;
  if (name == "macro_f1") return CheckpointMetric::MacroF1;
  throw ConfigError("unknown checkpoint metric '" + std::string(name) + "'");
}

void SurrogateTrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || max_sequence_length == 0 || !(l2_lambda > 0.0) || max_epochs == 0)
    throw ConfigError("surrogate training settings must be positive");
  if (ngram_order < 1 || ngram_order > 3) throw ConfigError("ngram_order must be 1, 2 or 3");
  if (!(smoothing_alpha > 0.0)) throw ConfigError("smoothing_alpha must be positive");
}

std::vector<Proposal> SurrogateModel::propose(const std::vector<std::string>&, std::size_t) const { return {}; }

// --- n-gram language model ---------------------------------------------------

namespace {
constexpr std::uint32_t kUnk = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kEos = kUnk - 1;
constexpr std::uint32_t kBos = kUnk - 2;
}  // namespace

NgramLanguageModel::NgramLanguageModel(std::size_t order, double alpha) : order_(order), alpha_(alpha) {
  if (order < 1 || order > 3) throw ConfigError("ngram order must be 1, 2 or 3");
  if (!(alpha > 0.0)) throw ConfigError("smoothing alpha must be positive");
}

void NgramLanguageModel::add_vocabulary(const std::vector<std::string>& words) {
  for (const auto& w : words) vocab_.try_emplace(to_lower_ascii(w), static_cast<Id>(vocab_.size()));
}

bool NgramLanguageModel::in_vocabulary(std::string_view word) const {
  return vocab_.contains(to_lower_ascii(word));
}

NgramLanguageModel::Id NgramLanguageModel::id_of(const std::string& lowered) const {
  auto it = vocab_.find(lowered);
  return it == vocab_.end() ? kUnk : it->second;
}

std::vector<NgramLanguageModel::Id> NgramLanguageModel::encode(const std::vector<std::string>& tokens) const {
  std::vector<Id> ids(order_ - 1, kBos);
  for (const auto& t : tokens) ids.push_back(id_of(to_lower_ascii(t)));
  return ids;
}

void NgramLanguageModel::observe(const std::vector<std::string>& tokens) {
  add_vocabulary(tokens);
  auto ids = encode(tokens);
  ids.push_back(kEos);
  const std::size_t h = order_ - 1;
  for (std::size_t i = h; i < ids.size(); ++i) {
    std::vector<Id> history(ids.begin() + static_cast<std::ptrdiff_t>(i - h), ids.begin() + static_cast<std::ptrdiff_t>(i));
    auto& c = counts_[history];
    ++c.total;
    ++c.next[ids[i]];
  }
}

std::vector<double> NgramLanguageModel::conditionals(const std::vector<std::string>& tokens) const {
  const auto ids = encode(tokens);
  const std::size_t h = order_ - 1;
  const double outcomes = static_cast<double>(effective_vocabulary());
  std::vector<double> probs;
  probs.reserve(tokens.size());
  std::vector<Id> history;
  for (std::size_t i = h; i < ids.size(); ++i) {
    history.assign(ids.begin() + static_cast<std::ptrdiff_t>(i - h), ids.begin() + static_cast<std::ptrdiff_t>(i));
    double count = 0.0;
    double total = 0.0;
    if (auto it = counts_.find(history); it != counts_.end()) {
      total = static_cast<double>(it->second.total);
      if (auto jt = it->second.next.find(ids[i]); jt != it->second.next.end()) count = static_cast<double>(jt->second);
    }
    probs.push_back((count + alpha_) / (total + alpha_ * outcomes));
  }
  return probs;
}

double NgramLanguageModel::perplexity(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw ConfigError("perplexity of an empty token sequence is undefined");
  double log_sum = 0.0;
  for (double p : conditionals(tokens)) log_sum += std::log(p);
  return std::exp(-log_sum / static_cast<double>(tokens.size()));
}

double NgramLanguageModel::corpus_perplexity(const std::vector<std::vector<std::string>>& sentences) const {
  double log_sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : sentences) {
    for (double p : conditionals(s)) log_sum += std::log(p);
    count += s.size();
  }
  if (count == 0) throw ConfigError("corpus perplexity over zero tokens");
  return std::exp(-log_sum / static_cast<double>(count));
}

// --- naive Bayes ---------------------------------------------------------------

NaiveBayesClassifier::NaiveBayesClassifier(LabelSet labels, double alpha)
    : labels_(std::move(labels)),
      alpha_(alpha),
      doc_counts_(labels_.size(), 0),
      token_totals_(labels_.size(), 0),
      token_counts_(labels_.size()) {
  if (labels_.size() < 2) throw ConfigError("classifier needs at least 2 labels");
  if (!(alpha > 0.0)) throw ConfigError("smoothing alpha must be positive");
}

void NaiveBayesClassifier::observe(const std::vector<std::string>& tokens, std::size_t label_index) {
  ++doc_counts_.at(label_index);
  for (const auto& t : tokens) {
    auto [it, inserted] = vocab_.try_emplace(to_lower_ascii(t), vocab_.size());
    ++token_counts_[label_index][it->second];
    ++token_totals_[label_index];
  }
}

std::vector<double> NaiveBayesClassifier::posterior(const std::vector<std::string>& tokens) const {
  const double docs = static_cast<double>(std::accumulate(doc_counts_.begin(), doc_counts_.end(), std::uint64_t{0}));
  const double vocab = static_cast<double>(vocab_.size());
  std::vector<double> logits(labels_.size());
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    if (doc_counts_[c] == 0) throw ConfigError("label '" + labels_[c] + "' was never observed");
    double logit = std::log(static_cast<double>(doc_counts_[c]) / docs);
    const double denom = static_cast<double>(token_totals_[c]) + alpha_ * vocab;
    for (const auto& t : tokens) {
      auto it = vocab_.find(to_lower_ascii(t));
      if (it == vocab_.end()) continue;
      const auto& counts = token_counts_[c];
      auto jt = counts.find(it->second);
      const double n = jt == counts.end() ? 0.0 : static_cast<double>(jt->second);
      logit += std::log((n + alpha_) / denom);
    }
    logits[c] = logit;
  }
  return softmax(logits);
}

std::size_t NaiveBayesClassifier::predict(const std::vector<std::string>& tokens) const {
  return argmax_lowest(posterior(tokens));
}

// --- co-occurrence neighbours ------------------------------------------------------

CooccurrenceNeighbors::CooccurrenceNeighbors(const std::vector<std::vector<std::string>>& sentences,
                                             std::size_t max_neighbors)
    : max_neighbors_(max_neighbors) {
  for (const auto& raw : sentences) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto word = to_lower_ascii(raw[i]);
      auto& ctx = contexts_[word];
      ctx["L:" + (i == 0 ? std::string("<s>") : to_lower_ascii(raw[i - 1]))] += 1.0;
      ctx["R:" + (i + 1 == raw.size() ? std::string("</s>") : to_lower_ascii(raw[i + 1]))] += 1.0;
    }
  }
  for (const auto& [word, ctx] : contexts_) {
    double sq = 0.0;
    for (const auto& [_, v] : ctx) sq += v * v;
    norms_[word] = std::sqrt(sq);
  }
}

std::vector<Proposal> CooccurrenceNeighbors::neighbors(std::string_view word) const {
  const auto key = to_lower_ascii(word);
  {
    std::lock_guard lock(*cache_mutex_);
    if (auto it = cache_->find(key); it != cache_->end()) return it->second;
  }
  std::vector<Proposal> out;
  if (auto self = contexts_.find(key); self != contexts_.end()) {
    const double self_norm = norms_.at(key);
    for (const auto& [other, ctx] : contexts_) {
      if (other == key) continue;
      double dot = 0.0;
      // Walk the smaller map, look up in the larger.
      const auto& small = ctx.size() < self->second.size() ? ctx : self->second;
      const auto& large = ctx.size() < self->second.size() ? self->second : ctx;
      for (const auto& [feature, v] : small)
        if (auto jt = large.find(feature); jt != large.end()) dot += v * jt->second;
      if (dot > 0.0) out.push_back({other, dot / (self_norm * norms_.at(other))});
    }
    std::stable_sort(out.begin(), out.end(), [](const Proposal& a, const Proposal& b) {
      return a.weight > b.weight || (a.weight == b.weight && a.token < b.token);
    });
    if (out.size() > max_neighbors_) out.resize(max_neighbors_);
  }
  std::lock_guard lock(*cache_mutex_);
  cache_->emplace(key, out);
  return out;
}

// --- lightweight scorer -------------------------------------------------------------

LightweightModel::LightweightModel(NgramLanguageModel lm, NaiveBayesClassifier classifier,
                                   CooccurrenceNeighbors neighbors)
    : lm_(std::move(lm)), classifier_(std::move(classifier)), neighbors_(std::move(neighbors)) {}

ScoreTriple LightweightModel::score(std::string_view text, std::optional<std::string_view>) const {
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw ConfigError("cannot score a text without tokens");
  ScoreTriple triple;
  triple.perplexity = lm_.perplexity(tokens);
  triple.confidence = classifier_.posterior(tokens);
  triple.label = labels()[argmax_lowest(triple.confidence)];
  return triple;
}

std::vector<Proposal> LightweightModel::propose(const std::vector<std::string>& tokens, std::size_t position) const {
  if (position >= tokens.size()) return {};
  return neighbors_.neighbors(tokens[position]);
}

NaiveBayesClassifier train_naive_bayes(const Dataset& train, const Dataset& valid, const SurrogateTrainConfig& config,
                                       std::optional<double>* validation_metric) {
  require_all_labels(train);
  for (const auto& ex : valid.examples)
    if (!train.labels.contains(ex.label))
      throw ConfigError("validation label '" + ex.label + "' not in the training label set");
  const auto sentences = lowered_sentences(train);

  auto fit = [&](double alpha) {
    NaiveBayesClassifier nb(train.labels, alpha);
    for (std::size_t i = 0; i < train.size(); ++i)
      nb.observe(sentences[i], *train.labels.index_of(train.examples[i].label));
    return nb;
  };

  if (valid.empty()) {
    if (validation_metric) validation_metric->reset();
    return fit(config.smoothing_alpha);
  }
  std::optional<NaiveBayesClassifier> best;
  double best_metric = -1.0;
  for (double alpha : kSmoothingGrid) {
    auto nb = fit(alpha);
    const double metric = classification_metric(nb, valid, config.checkpoint_metric);
    if (!best || metric > best_metric ||
        (metric == best_metric && prefer_alpha(alpha, best->alpha(), config.smoothing_alpha))) {
      best_metric = metric;
      best = std::move(nb);
    }
  }
  if (validation_metric) *validation_metric = best_metric;
  return std::move(*best);
}

std::unique_ptr<LightweightModel> train_lightweight(const Dataset& train, const Dataset& valid,
                                                    const SurrogateTrainConfig& config, std::uint64_t) {
  config.validate();
  if (train.empty()) throw ConfigError("surrogate training set is empty");
  std::optional<double> metric;
  auto nb = train_naive_bayes(train, valid, config, &metric);
  const auto sentences = lowered_sentences(train);

  auto fit_lm = [&](std::size_t order, double alpha) {
    NgramLanguageModel lm(order, alpha);
    for (const auto& s : sentences) lm.observe(s);
    return lm;
  };

  std::optional<NgramLanguageModel> lm;
  if (valid.empty()) {
    lm = fit_lm(config.ngram_order, config.smoothing_alpha);
  } else {
    const auto held_out = lowered_sentences(valid);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t order = 1; order <= 3; ++order) {
      for (double alpha : kSmoothingGrid) {
        auto candidate = fit_lm(order, alpha);
        const double ppl = candidate.corpus_perplexity(held_out);
        const bool better = ppl < best;
        const bool tie_to_default =
            lm && ppl == best && order == config.ngram_order && prefer_alpha(alpha, lm->alpha(), config.smoothing_alpha);
        if (better || tie_to_default) {
          best = ppl;
          lm = std::move(candidate);
        }
      }
    }
  }

  TrainProvenance prov;
  prov.validation_metric = metric;
  prov.selection = "nb_alpha=" + std::to_string(nb.alpha()) + " ngram_order=" + std::to_string(lm->order()) +
                   " ngram_alpha=" + std::to_string(lm->alpha());
  auto model = std::make_unique<LightweightModel>(std::move(*lm), std::move(nb), CooccurrenceNeighbors(sentences));
  model->set_provenance(std::move(prov));
  return model;
}

double pseudo_perplexity(const SurrogateModel& model, std::string_view text) {
  if (tokenize(text).empty()) throw ConfigError("pseudo-perplexity needs at least one token");
  return model.score(text, std::nullopt).perplexity;
}

std::vector<double> confidence(const SurrogateModel& model, std::string_view text,
                               std::optional<std::string_view> aspect) {
  return model.score(text, aspect).confidence;
}

double classification_metric(const NaiveBayesClassifier& classifier, const Dataset& data, CheckpointMetric metric) {
  std::vector<std::size_t> gold;
  std::vector<std::size_t> predicted;
  for (const auto& ex : data.examples) {
    const auto idx = classifier.labels().index_of(ex.label);
    if (!idx) throw ConfigError("label '" + ex.label + "' unknown to the classifier");
    gold.push_back(*idx);
    predicted.push_back(classifier.predict(tokenize(ex.text)));
  }
  const auto scores = score_predictions(gold, predicted, classifier.labels().size());
  return metric == CheckpointMetric::Accuracy ? scores.accuracy : scores.macro_f1;
}

}  // namespace boostaug
