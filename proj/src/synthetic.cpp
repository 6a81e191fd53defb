#include "boostaug/synthetic.hpp"

#include <algorithm>
#include <array>

#include "boostaug/errors.hpp"
#include "boostaug/rng.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

namespace {

constexpr std::array<const char*, 8> kPositive{"good",  "great",     "excellent", "superb",
                                               "lovely", "wonderful", "brilliant", "fantastic"};
constexpr std::array<const char*, 8> kNegative{"bad",     "awful", "terrible", "dreadful",
                                               "horrible", "poor", "dismal",   "lousy"};

using Group = std::vector<std::string>;

const std::vector<Group>& noun_groups() {
  static const std::vector<Group> groups{{"movie", "film", "picture"},       {"plot", "story", "script"},
                                         {"cast", "acting", "performance"}, {"ending", "finale"},
                                         {"music", "soundtrack", "score"},   {"camera", "cinematography", "visuals"}};
  return groups;
}

const std::vector<Group>& adverb_groups() {
  static const std::vector<Group> groups{{"really", "truly", "quite"}, {"honestly", "frankly"}};
  return groups;
}

const Group& neutral_adjectives() {
  static const Group words{"long", "short", "recent", "new", "old"};
  return words;
}

const Group& tails() {
  static const Group words{"overall", "to be honest", "in the end", "for sure"};
  return words;
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.below(items.size())];
}

std::string noun(Rng& rng) { return pick(pick(noun_groups(), rng), rng); }
std::string adverb(Rng& rng) { return pick(pick(adverb_groups(), rng), rng); }

std::string sentence(const std::string& first, const std::string& second, const std::string* distractor, Rng& rng) {
  std::string s;
  switch (rng.below(4)) {
    case 0: s = "the " + noun(rng) + " was " + adverb(rng) + " " + first + " and the " + noun(rng) + " was " + second; break;
    case 1: s = "i thought the " + noun(rng) + " was " + first + " and " + second + " " + pick(tails(), rng); break;
    case 2: s = "a " + first + " " + noun(rng) + " and a " + second + " " + noun(rng); break;
    default: s = "overall the " + noun(rng) + " felt " + first + " and " + second; break;
  }
  if (distractor) s += " though the " + noun(rng) + " was " + *distractor;
  return s;
}

std::string misspell(const std::string& word) {
  if (word.size() < 4) return {};
  std::string out = word;
  std::swap(out[1], out[2]);
  return out == word ? std::string() : out;
}

}  // namespace

std::string SyntheticCorpus::antonym_of(const std::string& keyword) const {
  for (std::size_t i = 0; i < positive_keywords.size(); ++i) {
    if (positive_keywords[i] == keyword) return negative_keywords[i];
    if (negative_keywords[i] == keyword) return positive_keywords[i];
  }
  return {};
}

std::pair<std::size_t, std::size_t> SyntheticCorpus::keyword_counts(const std::string& text) const {
  std::pair<std::size_t, std::size_t> counts{0, 0};
  for (const auto& tok : tokenize(text)) {
    const auto lowered = to_lower_ascii(tok);
    if (std::find(positive_keywords.begin(), positive_keywords.end(), lowered) != positive_keywords.end()) ++counts.first;
    if (std::find(negative_keywords.begin(), negative_keywords.end(), lowered) != negative_keywords.end()) ++counts.second;
  }
  return counts;
}

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config) {
  if (config.keywords_per_class < 1 || config.keywords_per_class > kPositive.size())
    throw ConfigError("keywords_per_class must be in [1, 8]");
  if (config.train_keywords < 1 || config.train_keywords > config.keywords_per_class)
    throw ConfigError("train_keywords must be in [1, keywords_per_class]");
  if (config.keywords_per_sentence < 1 || config.keywords_per_sentence > 2)
    throw ConfigError("keywords_per_sentence must be 1 or 2");
  if (config.n_train < 2 || config.n_test < 2) throw ConfigError("synthetic splits need at least 2 examples");

  SyntheticCorpus corpus;
  for (std::size_t i = 0; i < config.keywords_per_class; ++i) {
    corpus.positive_keywords.emplace_back(kPositive[i]);
    corpus.negative_keywords.emplace_back(kNegative[i]);
  }

  std::map<std::string, std::vector<std::string>> synonyms;
  std::map<std::string, std::vector<std::string>> antonyms;
  auto add_group = [&](const Group& group) {
    for (const auto& w : group)
      for (const auto& other : group)
        if (other != w) synonyms[w].push_back(other);
  };
  for (const auto& g : noun_groups()) add_group(g);
  for (const auto& g : adverb_groups()) add_group(g);
  // Keyword i pairs with keyword i + K/2 of its class, which reaches the
  // keywords held out of training, and with keyword i of the other class.
  const std::size_t k = config.keywords_per_class;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& pos = corpus.positive_keywords;
    const auto& neg = corpus.negative_keywords;
    if (k > 1) {
      synonyms[pos[i]] = {pos[(i + k / 2) % k]};
      synonyms[neg[i]] = {neg[(i + k / 2) % k]};
    }
    antonyms[pos[i]] = {neg[i]};
    antonyms[neg[i]] = {pos[i]};
  }
  auto noisy = synonyms;
  for (const auto& [word, alts] : antonyms) noisy[word].push_back(alts.front());

  std::map<std::string, std::vector<std::string>> misspellings;
  auto add_misspelling = [&](const std::string& w) {
    if (auto m = misspell(w); !m.empty()) misspellings[w] = {m};
  };
  for (const auto& g : noun_groups())
    for (const auto& w : g) add_misspelling(w);
  for (const auto& w : corpus.positive_keywords) add_misspelling(w);
  for (const auto& w : corpus.negative_keywords) add_misspelling(w);

  corpus.synonyms = WordTable(std::move(synonyms));
  corpus.antonyms = WordTable(std::move(antonyms));
  corpus.noisy_synonyms = WordTable(std::move(noisy));
  corpus.misspellings = WordTable(std::move(misspellings));

  auto build = [&](std::size_t n, std::size_t keyword_pool, std::uint64_t stream, double noise) {
    Dataset d;
    d.task = Task::TC;
    d.labels.add("positive");
    d.labels.add("negative");
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(derive_seed({config.seed, stream, i}));
      const bool positive = i % 2 == 0;
      const auto& own = positive ? corpus.positive_keywords : corpus.negative_keywords;
      const auto& other = positive ? corpus.negative_keywords : corpus.positive_keywords;
      const std::string keyword = own[rng.below(keyword_pool)];
      const std::string second =
          config.keywords_per_sentence == 2 ? own[rng.below(keyword_pool)] : pick(neutral_adjectives(), rng);
      std::string distractor;
      const bool distracted = rng.bernoulli(config.distractor_rate);
      if (distracted) distractor = other[rng.below(keyword_pool)];
      Example ex;
      ex.id = i;
      ex.text = sentence(keyword, second, distracted ? &distractor : nullptr, rng);
      const bool flip = rng.bernoulli(noise);
      ex.label = (positive != flip) ? "positive" : "negative";
      d.examples.push_back(std::move(ex));
    }
    return d;
  };
  corpus.train = build(config.n_train, config.train_keywords, 0x7a1, config.label_noise);
  corpus.test = build(config.n_test, config.keywords_per_class, 0x7e57, 0.0);
  return corpus;
}

}  // namespace boostaug
