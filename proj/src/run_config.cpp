#include "boostaug/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "boostaug/errors.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

using json = nlohmann::json;

ScorerSpec ScorerSpec::parse(std::string_view spec) {
  if (spec == "lightweight") return {};
  auto body = [&](std::string_view prefix) { return std::string(trim(spec.substr(prefix.size()))); };
  if (spec.starts_with("exec:")) {
    ScorerSpec s{Kind::Exec, body("exec:")};
    if (s.target.empty()) throw ConfigError("scorer exec: needs a command");
    return s;
  }
  if (spec.starts_with("http:") && !spec.starts_with("http://")) {
    ScorerSpec s{Kind::Http, body("http:")};
    if (s.target.empty()) throw ConfigError("scorer http: needs an endpoint");
    return s;
  }
  if (spec.starts_with("http://")) return {Kind::Http, std::string(spec)};
  throw ConfigError("scorer must be lightweight, exec:<command> or http:<endpoint>, got '" + std::string(spec) + "'");
}

std::string ScorerSpec::to_string() const {
  switch (kind) {
    case Kind::Lightweight: return "lightweight";
    case Kind::Exec: return "exec:" + target;
    case Kind::Http: return "http:" + target;
  }
  return "lightweight";
}

const std::vector<OptionSpec>& run_config_options() {
  using K = OptionKind;
  static const std::vector<OptionSpec> options{
      {"task", K::String, "tc or absc", {}},
      {"k", K::Integer, "number of folds (> 3)", {}},
      {"n", K::IntegerList, "augmentations kept per example; a list for sweep", {}},
      {"seed", K::Integer, "global seed", {}},
      {"mode", K::String, "cross or mono", {}},
      {"backend", K::String, "eda, spelling, split or embed_sub", {}},
      {"token-prob", K::Number, "per-token transformation probability", {}},
      {"eda-weights", K::NumberList, "weights of synonym replace, insert, swap, delete", {}},
      {"max-attempts", K::Integer, "backend draws per requested candidate", {}},
      {"protect-aspect", K::Boolean, "never edit aspect tokens", {}},
      {"pool-multiplier", K::Integer, "candidates generated per kept augmentation", {}},
      {"include-originals", K::Boolean, "emit original examples alongside survivors", {}},
      {"confidence-threshold", K::Number, "candidates need max confidence above this", {}},
      {"perplexity-limit", K::Number, "candidates need perplexity below this (absolute mode)", {}},
      {"perplexity-mode", K::String, "absolute or relative", {}},
      {"relative-ratio", K::Number, "relative mode: limit as a multiple of the originals' median perplexity", {}},
      {"disable", K::StringList, "filter stages to skip: label, perplexity, confidence_rank, confidence_threshold", {}},
      {"learning-rate", K::Number, "surrogate learning rate (external scorers)", {}},
      {"batch-size", K::Integer, "surrogate batch size (external scorers)", {}},
      {"max-seq-len", K::Integer, "surrogate maximum sequence length (external scorers)", {}},
      {"l2-lambda", K::Number, "surrogate L2 regularisation (external scorers)", {}},
      {"epochs", K::Integer, "surrogate training epochs (external scorers)", {}},
      {"checkpoint-metric", K::String, "accuracy or macro_f1", {}},
      {"ngram-order", K::Integer, "lightweight n-gram order when no validation data", {}},
      {"smoothing-alpha", K::Number, "lightweight smoothing when no validation data", {}},
      {"synonyms", K::String, "synonym lexicon (word<TAB>alt,alt)", "BOOSTAUG_SYNONYMS"},
      {"misspellings", K::String, "misspelling dictionary (word<TAB>alt,alt)", "BOOSTAUG_MISSPELLINGS"},
      {"scorer", K::String, "lightweight, exec:<command> or http:<endpoint>", {}},
      {"scorer-timeout-ms", K::Integer, "per-request scorer timeout", {}},
      {"jobs", K::Integer, "worker threads", {}},
      {"embedding", K::String, "deterministic or tsne", {}},
      {"max-features", K::Integer, "featurizer vocabulary size", {}},
      {"seeds", K::Integer, "sweep repetitions", {}},
      {"modes", K::StringList, "sweep modes: boostaug, monoaug, raw_backend, none", {}},
  };
  return options;
}

const OptionSpec* find_option(std::string_view name) {
  for (const auto& o : run_config_options())
    if (o.name == name) return &o;
  return nullptr;
}

namespace {

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto piece = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

json parse_integer(const std::string& name, std::string_view text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("--" + name + ": expected a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

json parse_number(const std::string& name, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw ConfigError("--" + name + ": expected a number, got '" + s + "'");
  return v;
}

}  // namespace

json parse_option_text(const OptionSpec& spec, std::string_view text) {
  switch (spec.kind) {
    case OptionKind::Integer: return parse_integer(spec.name, trim(text));
    case OptionKind::Number: return parse_number(spec.name, trim(text));
    case OptionKind::Boolean: {
      const auto t = to_lower_ascii(trim(text));
      if (t == "true" || t == "1" || t == "yes") return true;
      if (t == "false" || t == "0" || t == "no") return false;
      throw ConfigError("--" + spec.name + ": expected true or false, got '" + std::string(text) + "'");
    }
    case OptionKind::String: return std::string(text);
    case OptionKind::IntegerList:
    case OptionKind::NumberList:
    case OptionKind::StringList: {
      json arr = json::array();
      for (const auto& piece : split_list(text)) {
        if (spec.kind == OptionKind::IntegerList) arr.push_back(parse_integer(spec.name, piece));
        else if (spec.kind == OptionKind::NumberList) arr.push_back(parse_number(spec.name, piece));
        else arr.push_back(piece);
      }
      return arr;
    }
  }
  return nullptr;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file " + path.string() + " must hold a JSON object");
  return j;
}

std::map<std::string, std::string> config_from_environment() {
  std::map<std::string, std::string> out;
  for (const auto& o : run_config_options()) {
    if (!o.env) continue;
    if (const char* v = std::getenv(o.env->c_str()); v && *v) out[o.name] = v;
  }
  return out;
}

namespace {

// Checks that a JSON value fits the option kind; scalars stand in for one-element lists.
json normalise(const OptionSpec& spec, const json& v, const std::string& origin) {
  auto fail = [&](const char* expected) -> json {
    throw ConfigError(origin + ": '" + spec.name + "' must be " + expected + ", got " + v.dump());
  };
  auto is_count = [](const json& x) {
    return x.is_number_unsigned() || (x.is_number_integer() && x.get<std::int64_t>() >= 0);
  };
  switch (spec.kind) {
    case OptionKind::Integer: return is_count(v) ? json(v.get<std::uint64_t>()) : fail("a non-negative integer");
    case OptionKind::Number: return v.is_number() ? json(v.get<double>()) : fail("a number");
    case OptionKind::Boolean: return v.is_boolean() ? v : fail("a boolean");
    case OptionKind::String: return v.is_string() ? v : fail("a string");
    case OptionKind::IntegerList:
    case OptionKind::NumberList:
    case OptionKind::StringList: {
      const json arr = v.is_array() ? v : json::array({v});
      json out = json::array();
      for (const auto& x : arr) {
        if (spec.kind == OptionKind::IntegerList) out.push_back(is_count(x) ? json(x.get<std::uint64_t>()) : fail("a list of non-negative integers"));
        else if (spec.kind == OptionKind::NumberList) out.push_back(x.is_number() ? json(x.get<double>()) : fail("a list of numbers"));
        else out.push_back(x.is_string() ? x : fail("a list of strings"));
      }
      return out;
    }
  }
  return v;
}

void apply_layer(json& merged, const json& layer, const std::string& origin) {
  for (const auto& [key, value] : layer.items()) {
    const auto* spec = find_option(key);
    if (!spec) throw ConfigError(origin + ": unknown key '" + key + "'");
    if (value.is_null()) {
      merged.erase(key);
      continue;
    }
    merged[key] = normalise(*spec, value, origin);
  }
}

void apply_text_layer(json& merged, const std::map<std::string, std::string>& layer, const std::string& origin) {
  for (const auto& [key, text] : layer) {
    const auto* spec = find_option(key);
    if (!spec) throw ConfigError(origin + ": unknown option '" + key + "'");
    merged[key] = parse_option_text(*spec, text);
  }
}

}  // namespace

RunConfig resolve_run_config(const ConfigLayers& layers, const json& defaults) {
  json merged = json::object();
  apply_layer(merged, defaults, "defaults");
  apply_layer(merged, layers.file, "config file");
  apply_text_layer(merged, layers.env, "environment");
  apply_text_layer(merged, layers.flags, "command line");

  RunConfig c;
  auto has = [&](const char* key) { return merged.contains(key); };
  auto str = [&](const char* key) { return merged.at(key).get<std::string>(); };
  auto count = [&](const char* key) { return static_cast<std::size_t>(merged.at(key).get<std::uint64_t>()); };
  auto num = [&](const char* key) { return merged.at(key).get<double>(); };

  if (has("task")) c.task = parse_task(str("task"));
  if (has("k")) c.boost.k = count("k");
  if (has("n")) c.n_values = merged.at("n").get<std::vector<std::size_t>>();
  if (has("seed")) c.boost.seed = merged.at("seed").get<std::uint64_t>();
  if (has("mode")) c.boost.mode = parse_boost_mode(str("mode"));
  if (has("backend")) c.boost.transform.strategy = parse_strategy(str("backend"));
  if (has("token-prob")) c.boost.transform.token_transform_prob = num("token-prob");
  if (has("eda-weights")) {
    const auto w = merged.at("eda-weights").get<std::vector<double>>();
    if (w.size() != 4) throw ConfigError("eda-weights needs exactly 4 values");
    std::copy(w.begin(), w.end(), c.boost.transform.eda_op_weights.begin());
  }
  if (has("max-attempts")) c.boost.transform.max_attempts = count("max-attempts");
  if (has("protect-aspect")) c.boost.transform.protect_aspect = merged.at("protect-aspect").get<bool>();
  if (has("pool-multiplier")) c.boost.pool_multiplier = count("pool-multiplier");
  if (has("include-originals")) c.boost.include_originals = merged.at("include-originals").get<bool>();
  if (has("confidence-threshold")) c.boost.filter.confidence_threshold = num("confidence-threshold");
  if (has("perplexity-limit")) c.boost.filter.perplexity_limit = num("perplexity-limit");
  if (has("perplexity-mode")) c.boost.filter.perplexity_mode = parse_perplexity_mode(str("perplexity-mode"));
  if (has("relative-ratio")) c.boost.filter.relative_ratio = num("relative-ratio");
  if (has("disable")) {
    for (const auto& name : merged.at("disable").get<std::vector<std::string>>())
      c.boost.filter.enabled.erase(parse_filter_stage(name));
  }
  if (has("learning-rate")) c.boost.train.learning_rate = num("learning-rate");
  if (has("batch-size")) c.boost.train.batch_size = count("batch-size");
  if (has("max-seq-len")) c.boost.train.max_sequence_length = count("max-seq-len");
  if (has("l2-lambda")) c.boost.train.l2_lambda = num("l2-lambda");
  if (has("epochs")) c.boost.train.max_epochs = count("epochs");
  if (has("checkpoint-metric")) c.boost.train.checkpoint_metric = parse_checkpoint_metric(str("checkpoint-metric"));
  if (has("ngram-order")) c.boost.train.ngram_order = count("ngram-order");
  if (has("smoothing-alpha")) c.boost.train.smoothing_alpha = num("smoothing-alpha");
  if (has("synonyms")) c.synonyms = str("synonyms");
  if (has("misspellings")) c.misspellings = str("misspellings");
  if (has("scorer")) c.scorer = ScorerSpec::parse(str("scorer"));
  if (has("scorer-timeout-ms")) c.scorer_timeout = std::chrono::milliseconds(count("scorer-timeout-ms"));
  if (has("jobs")) c.boost.jobs = count("jobs");
  if (has("embedding")) c.embedding = parse_embed_method(str("embedding"));
  if (has("max-features")) c.max_features = count("max-features");
  if (has("seeds")) c.seeds = count("seeds");
  if (has("modes")) {
    c.modes.clear();
    for (const auto& name : merged.at("modes").get<std::vector<std::string>>()) c.modes.push_back(parse_sweep_mode(name));
  }
  if (!c.n_values.empty()) c.boost.filter.keep_per_example = c.n_values.front();
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (n_values.empty()) throw ConfigError("n needs at least one value");
  for (auto n : n_values)
    if (n == 0) throw ConfigError("n must be positive");
  boost.validate();
  if (boost.jobs == 0) throw ConfigError("jobs must be positive");
  for (const auto& [name, path] : {std::pair{"synonyms", synonyms}, std::pair{"misspellings", misspellings}}) {
    if (path && !std::filesystem::is_regular_file(*path))
      throw ConfigError(std::string(name) + " file not found: " + path->string());
  }
  if (scorer_timeout.count() <= 0) throw ConfigError("scorer-timeout-ms must be positive");
  if (max_features == 0) throw ConfigError("max-features must be positive");
  if (seeds == 0) throw ConfigError("seeds must be positive");
  if (modes.empty()) throw ConfigError("modes needs at least one value");
}

json RunConfig::echo() const {
  const auto& t = boost.transform;
  const auto& f = boost.filter;
  const auto& tr = boost.train;
  json disabled = json::array();
  for (auto s : {FilterStage::Label, FilterStage::Perplexity, FilterStage::ConfidenceRank, FilterStage::ConfidenceThreshold})
    if (!f.is_enabled(s)) disabled.push_back(boostaug::to_string(s));
  json modes_json = json::array();
  for (auto m : modes) modes_json.push_back(boostaug::to_string(m));
  return {
      {"task", boostaug::to_string(task)},
      {"k", boost.k},
      {"n", n_values},
      {"seed", boost.seed},
      {"mode", boostaug::to_string(boost.mode)},
      {"backend", boostaug::to_string(t.strategy)},
      {"token-prob", t.token_transform_prob},
      {"eda-weights", t.eda_op_weights},
      {"max-attempts", t.max_attempts},
      {"protect-aspect", t.protect_aspect},
      {"pool-multiplier", boost.pool_multiplier},
      {"include-originals", boost.include_originals},
      {"confidence-threshold", f.confidence_threshold},
      {"perplexity-limit", f.perplexity_limit},
      {"perplexity-mode", boostaug::to_string(f.perplexity_mode)},
      {"relative-ratio", f.relative_ratio},
      {"disable", disabled},
      {"learning-rate", tr.learning_rate},
      {"batch-size", tr.batch_size},
      {"max-seq-len", tr.max_sequence_length},
      {"l2-lambda", tr.l2_lambda},
      {"epochs", tr.max_epochs},
      {"checkpoint-metric", boostaug::to_string(tr.checkpoint_metric)},
      {"ngram-order", tr.ngram_order},
      {"smoothing-alpha", tr.smoothing_alpha},
      {"synonyms", synonyms ? json(synonyms->string()) : json(nullptr)},
      {"misspellings", misspellings ? json(misspellings->string()) : json(nullptr)},
      {"scorer", scorer.to_string()},
      {"scorer-timeout-ms", scorer_timeout.count()},
      {"embedding", boostaug::to_string(embedding)},
      {"max-features", max_features},
      {"seeds", seeds},
      {"modes", modes_json},
  };
}

BackendResources load_resources(const RunConfig& config) {
  BackendResources r;
  if (config.synonyms) r.synonyms = load_word_table(*config.synonyms);
  if (config.misspellings) r.misspellings = load_word_table(*config.misspellings);
  return r;
}

}  // namespace boostaug
