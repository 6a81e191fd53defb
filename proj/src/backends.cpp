#include "boostaug/backends.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "boostaug/errors.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Eda: return "eda";
    case Strategy::Spelling: return "spelling";
    case Strategy::Split: return "split";
    case Strategy::EmbedSub: return "embed_sub";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "eda") return Strategy::Eda;
  if (name == "spelling") return Strategy::Spelling;
  if (name == "split") return Strategy::Split;
  if (name == "embed_sub") return Strategy::EmbedSub;
  throw ConfigError("unknown backend '" + std::string(name) + "' (expected eda, spelling, split or embed_sub)");
}

void TransformConfig::validate() const {
  if (!(token_transform_prob >= 0.0 && token_transform_prob <= 1.0))
    throw ConfigError("token_transform_prob must lie in [0,1]");
  double total = 0.0;
  for (double w : eda_op_weights) {
    if (!(w >= 0.0)) throw ConfigError("EDA operation weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError("EDA operation weights must not all be zero");
  if (max_attempts == 0) throw ConfigError("max_attempts must be at least 1");
}

WordTable::WordTable(std::map<std::string, std::vector<std::string>> entries) {
  for (auto& [k, v] : entries)
    if (!v.empty()) entries_.emplace(k, std::move(v));
}

const std::vector<std::string>* WordTable::find(std::string_view word) const {
  if (auto it = entries_.find(word); it != entries_.end()) return &it->second;
  if (auto it = entries_.find(to_lower_ascii(word)); it != entries_.end()) return &it->second;
  return nullptr;
}

WordTable load_word_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, std::vector<std::string>> entries;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), n, "missing tab separator");
    const std::string word(trim(std::string_view(line).substr(0, tab)));
    if (word.empty()) throw ParseError(path.string(), n, "empty headword");
    auto& alts = entries[word];
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (!item.empty() && item != word &&
          std::find(alts.begin(), alts.end(), item) == alts.end())
        alts.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  return WordTable(std::move(entries));
}

double AugmentationCandidate::max_confidence() const {
  if (!confidence || confidence->empty()) return 0.0;
  return *std::max_element(confidence->begin(), confidence->end());
}

TokenState TokenState::from_example(const Example& example, bool protect_aspect) {
  TokenState s;
  s.tokens = tokenize(example.text);
  if (protect_aspect && example.aspect_span && example.aspect_span->end <= s.tokens.size())
    s.aspect = example.aspect_span;
  return s;
}

void TokenState::insert(std::size_t at, std::string token) {
  tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(at), std::move(token));
  if (aspect && at <= aspect->begin) {
    ++aspect->begin;
    ++aspect->end;
  }
}

void TokenState::erase(std::size_t at) {
  tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(at));
  if (aspect && at < aspect->begin) {
    --aspect->begin;
    --aspect->end;
  }
}

namespace {

std::vector<std::size_t> select_positions(const TokenState& state, double prob, Rng& rng) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < state.tokens.size(); ++i) {
    if (state.is_protected(i)) continue;
    if (rng.bernoulli(prob)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> unprotected_positions(const TokenState& state) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < state.tokens.size(); ++i)
    if (!state.is_protected(i)) out.push_back(i);
  return out;
}

// Locates the aspect tokens when they were not tracked through the edits.
std::optional<TokenSpan> find_aspect(const std::vector<std::string>& tokens, const std::string& aspect) {
  const auto needle = tokenize(aspect);
  if (needle.empty() || needle.size() > tokens.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i)))
      return TokenSpan{i, i + needle.size()};
  return std::nullopt;
}

AugmentationCandidate finish(const Example& example, const TokenState& state, Strategy strategy) {
  AugmentationCandidate c;
  c.origin_id = example.id;
  c.backend = std::string(to_string(strategy));
  const auto original = tokenize(example.text);
  c.identity = state.tokens == original;
  c.text = c.identity ? example.text : detokenize(state.tokens);
  if (example.aspect) {
    if (c.identity)
      c.aspect_span = example.aspect_span;
    else if (state.aspect)
      c.aspect_span = state.aspect;
    else
      c.aspect_span = find_aspect(state.tokens, *example.aspect);
  }
  return c;
}

void eda_synonym_replace(TokenState& s, const std::vector<std::size_t>& picked, const WordTable& synonyms, Rng& rng) {
  for (auto i : picked)
    if (const auto* alts = synonyms.find(s.tokens[i])) s.tokens[i] = (*alts)[rng.below(alts->size())];
}

void eda_random_insert(TokenState& s, const std::vector<std::size_t>& picked, const WordTable& synonyms, Rng& rng) {
  std::vector<std::string> words;
  for (auto i : picked)
    if (const auto* alts = synonyms.find(s.tokens[i])) words.push_back((*alts)[rng.below(alts->size())]);
  for (auto& w : words) {
    // Any gap outside the interior of the protected span.
    std::vector<std::size_t> gaps;
    for (std::size_t g = 0; g <= s.tokens.size(); ++g)
      if (!s.aspect || g <= s.aspect->begin || g >= s.aspect->end) gaps.push_back(g);
    s.insert(gaps[rng.below(gaps.size())], std::move(w));
  }
}

void eda_random_swap(TokenState& s, const std::vector<std::size_t>& picked, Rng& rng) {
  const auto free = unprotected_positions(s);
  if (free.size() < 2) return;
  for (auto i : picked) {
    std::vector<std::size_t> others;
    for (auto f : free)
      if (f != i) others.push_back(f);
    std::swap(s.tokens[i], s.tokens[others[rng.below(others.size())]]);
  }
}

void eda_random_delete(TokenState& s, std::vector<std::size_t> picked, Rng& rng) {
  if (picked.size() == s.tokens.size()) {
    // Never delete everything: one seeded survivor stays.
    picked.erase(picked.begin() + static_cast<std::ptrdiff_t>(rng.below(picked.size())));
  }
  for (auto it = picked.rbegin(); it != picked.rend(); ++it) s.erase(*it);
}

}  // namespace

AugmentationCandidate eda_transform(const Example& example, const TransformConfig& config,
                                    const BackendResources& resources, Rng& rng) {
  auto state = TokenState::from_example(example, config.protect_aspect);
  const auto op = static_cast<EdaOp>(rng.weighted(config.eda_op_weights));
  const auto picked = select_positions(state, config.token_transform_prob, rng);
  if (!picked.empty()) {
    switch (op) {
      case EdaOp::SynonymReplace: eda_synonym_replace(state, picked, resources.synonyms, rng); break;
      case EdaOp::RandomInsert: eda_random_insert(state, picked, resources.synonyms, rng); break;
      case EdaOp::RandomSwap: eda_random_swap(state, picked, rng); break;
      case EdaOp::RandomDelete: eda_random_delete(state, picked, rng); break;
    }
  }
  return finish(example, state, Strategy::Eda);
}

AugmentationCandidate spelling_transform(const Example& example, const TransformConfig& config,
                                         const BackendResources& resources, Rng& rng) {
  auto state = TokenState::from_example(example, config.protect_aspect);
  for (auto i : select_positions(state, config.token_transform_prob, rng))
    if (const auto* alts = resources.misspellings.find(state.tokens[i]))
      state.tokens[i] = (*alts)[rng.below(alts->size())];
  return finish(example, state, Strategy::Spelling);
}

AugmentationCandidate split_transform(const Example& example, const TransformConfig& config, Rng& rng) {
  auto state = TokenState::from_example(example, config.protect_aspect);
  const auto picked = select_positions(state, config.token_transform_prob, rng);
  for (auto it = picked.rbegin(); it != picked.rend(); ++it) {
    const std::string word = state.tokens[*it];
    const auto len = utf8_length(word);
    if (len < 4) continue;
    const auto cut = utf8_offset(word, 1 + rng.below(len - 1));
    state.tokens[*it] = word.substr(0, cut);
    state.insert(*it + 1, word.substr(cut));
  }
  return finish(example, state, Strategy::Split);
}

AugmentationCandidate embed_substitute_transform(const Example& example, const TransformConfig& config,
                                                 const SurrogateModel& proposer, Rng& rng) {
  auto state = TokenState::from_example(example, config.protect_aspect);
  for (auto i : select_positions(state, config.token_transform_prob, rng)) {
    auto proposals = proposer.propose(state.tokens, i);
    const auto self = to_lower_ascii(state.tokens[i]);
    std::erase_if(proposals, [&](const Proposal& p) { return to_lower_ascii(p.token) == self || !(p.weight > 0.0); });
    if (proposals.empty()) continue;
    if (proposals.size() == 1) {
      state.tokens[i] = proposals.front().token;
      continue;
    }
    std::vector<double> weights;
    for (const auto& p : proposals) weights.push_back(p.weight);
    state.tokens[i] = proposals[rng.weighted(weights)].token;
  }
  return finish(example, state, Strategy::EmbedSub);
}

AugmentationCandidate transform(const Example& example, const TransformConfig& config,
                                const BackendResources& resources, const SurrogateModel* proposer, Rng& rng) {
  switch (config.strategy) {
    case Strategy::Eda: return eda_transform(example, config, resources, rng);
    case Strategy::Spelling: return spelling_transform(example, config, resources, rng);
    case Strategy::Split: return split_transform(example, config, rng);
    case Strategy::EmbedSub:
      if (!proposer) throw ConfigError("embed_sub backend needs a scorer to propose substitutes");
      return embed_substitute_transform(example, config, *proposer, rng);
  }
  throw ConfigError("unknown strategy");
}

std::vector<AugmentationCandidate> generate(const Example& example, std::size_t count, const TransformConfig& config,
                                            const BackendResources& resources, const SurrogateModel* proposer,
                                            std::uint64_t seed) {
  if (count == 0) throw ConfigError("candidate count must be at least 1");
  config.validate();
  std::vector<AugmentationCandidate> out;
  std::set<std::string> seen{example.text};
  const std::size_t budget = config.max_attempts * count;
  for (std::size_t draw = 0; draw < budget && out.size() < count; ++draw) {
    Rng rng(derive_seed({seed, example.id, draw}));
    auto cand = transform(example, config, resources, proposer, rng);
    cand.draw_index = draw;
    if (cand.identity || trim(cand.text).empty()) continue;
    if (example.aspect && !cand.aspect_span) continue;
    if (!seen.insert(cand.text).second) continue;
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace boostaug
