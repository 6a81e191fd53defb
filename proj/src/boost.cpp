#include "boostaug/boost.hpp"

#include <algorithm>
#include <fstream>

#include "boostaug/errors.hpp"
#include "boostaug/external_scorer.hpp"
#include "boostaug/parallel.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

using json = nlohmann::json;

std::string_view to_string(BoostMode mode) { return mode == BoostMode::Cross ? "cross" : "mono"; }

BoostMode parse_boost_mode(std::string_view name) {
  if (name == "cross") return BoostMode::Cross;
  if (name == "mono") return BoostMode::Mono;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected cross or mono)");
}

void BoostRunConfig::validate() const {
  if (mode == BoostMode::Cross && k <= 3) throw ConfigError("k must exceed 3 in cross mode, got " + std::to_string(k));
  if (pool_multiplier < 1) throw ConfigError("pool_multiplier must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  transform.validate();
  filter.validate();
  train.validate();
}

json to_json(const BoostRunConfig& c) {
  json stages = json::array();
  for (auto s : c.filter.enabled) stages.push_back(to_string(s));
  return {
      {"k", c.k},
      {"seed", c.seed},
      {"mode", to_string(c.mode)},
      {"pool_multiplier", c.pool_multiplier},
      {"include_originals", c.include_originals},
      {"backend", to_string(c.transform.strategy)},
      {"token_prob", c.transform.token_transform_prob},
      {"eda_weights", c.transform.eda_op_weights},
      {"max_attempts", c.transform.max_attempts},
      {"protect_aspect", c.transform.protect_aspect},
      {"n", c.filter.keep_per_example},
      {"confidence_threshold", c.filter.confidence_threshold},
      {"perplexity_limit", c.filter.perplexity_limit},
      {"perplexity_mode", to_string(c.filter.perplexity_mode)},
      {"relative_ratio", c.filter.relative_ratio},
      {"enabled", stages},
      {"learning_rate", c.train.learning_rate},
      {"batch_size", c.train.batch_size},
      {"max_sequence_length", c.train.max_sequence_length},
      {"l2_lambda", c.train.l2_lambda},
      {"max_epochs", c.train.max_epochs},
      {"checkpoint_metric", to_string(c.train.checkpoint_metric)},
      {"ngram_order", c.train.ngram_order},
      {"smoothing_alpha", c.train.smoothing_alpha},
  };
}

SurrogateFactory lightweight_factory(const SurrogateTrainConfig& config, std::uint64_t seed) {
  return [config, seed](const Dataset& train, const Dataset& valid, std::size_t iteration) {
    std::unique_ptr<SurrogateModel> model = train_lightweight(train, valid, config, derive_seed({seed, iteration}));
    return model;
  };
}

namespace {

std::string replace_all(std::string s, std::string_view from, const std::string& to) {
  for (auto at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size())) s.replace(at, from.size(), to);
  return s;
}

json train_config_json(const SurrogateTrainConfig& c) {
  return {{"learning_rate", c.learning_rate},     {"batch_size", c.batch_size},
          {"max_sequence_length", c.max_sequence_length}, {"l2_lambda", c.l2_lambda},
          {"max_epochs", c.max_epochs},           {"checkpoint_metric", to_string(c.checkpoint_metric)},
          {"ngram_order", c.ngram_order},         {"smoothing_alpha", c.smoothing_alpha}};
}

}  // namespace

SurrogateFactory external_factory(std::string command_template, const SurrogateTrainConfig& config,
                                  std::filesystem::path work_dir, std::chrono::milliseconds timeout) {
  return [command_template = std::move(command_template), config, work_dir = std::move(work_dir), timeout](
             const Dataset& train, const Dataset& valid, std::size_t iteration) -> std::unique_ptr<SurrogateModel> {
    std::filesystem::create_directories(work_dir);
    const auto stem = work_dir / ("iteration" + std::to_string(iteration));
    const auto ext = train.task == Task::TC ? ".tsv" : ".txt";
    const auto train_path = std::filesystem::path(stem.string() + "_train" + ext);
    const auto valid_path = std::filesystem::path(stem.string() + "_valid" + ext);
    const auto config_path = std::filesystem::path(stem.string() + "_config.json");
    write_dataset(train, train_path);
    write_dataset(valid, valid_path);
    {
      std::ofstream out(config_path);
      if (!out) throw IoError("cannot write " + config_path.string());
      out << train_config_json(config).dump(2) << '\n';
    }
    auto command = replace_all(command_template, "{train}", train_path.string());
    command = replace_all(command, "{valid}", valid_path.string());
    command = replace_all(command, "{config}", config_path.string());
    command = replace_all(command, "{iteration}", std::to_string(iteration));
    return connect_external_scorer(command, train.labels, timeout);
  };
}

double RunReport::survivor_rate() const {
  return totals.generated == 0 ? 0.0 : static_cast<double>(totals.survived) / static_cast<double>(totals.generated);
}

namespace {

json trace_json(const FilterTrace& t) {
  return {{"generated", t.generated},
          {"removed_label", t.removed_label},
          {"removed_perplexity", t.removed_perplexity},
          {"removed_rank", t.removed_rank},
          {"removed_threshold", t.removed_threshold},
          {"survived", t.survived}};
}

FilterTrace trace_from_json(const json& j) {
  FilterTrace t;
  t.generated = j.at("generated").get<std::size_t>();
  t.removed_label = j.at("removed_label").get<std::size_t>();
  t.removed_perplexity = j.at("removed_perplexity").get<std::size_t>();
  t.removed_rank = j.at("removed_rank").get<std::size_t>();
  t.removed_threshold = j.at("removed_threshold").get<std::size_t>();
  t.survived = j.at("survived").get<std::size_t>();
  return t;
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

json to_json(const RunReport& r) {
  json iterations = json::array();
  for (const auto& it : r.per_iteration) {
    json j = {{"iteration", it.iteration},
              {"boost_fold", optional_json(it.boost_fold)},
              {"valid_fold", optional_json(it.valid_fold)},
              {"train_folds", it.train_folds},
              {"n_train", it.n_train},
              {"n_valid", it.n_valid},
              {"n_boost", it.n_boost},
              {"validation_metric", optional_json(it.validation_metric)},
              {"selection", it.selection},
              {"median_perplexity", optional_json(it.median_perplexity)}};
    j.update(trace_json(it.counts));
    iterations.push_back(std::move(j));
  }
  json examples = json::array();
  for (const auto& ex : r.per_example) {
    json j = {{"origin_id", ex.origin_id}, {"fold_iteration", ex.fold_iteration}};
    j.update(trace_json(ex.counts));
    examples.push_back(std::move(j));
  }
  json totals = trace_json(r.totals);
  totals["survivor_rate"] = r.survivor_rate();
  totals["examples"] = r.per_example.size();
  totals["output_size"] = r.output_size;
  if (r.survivor_rate_delta) totals["survivor_rate_delta"] = *r.survivor_rate_delta;
  return {{"mode", to_string(r.mode)},  {"config_echo", r.config_echo}, {"warnings", r.warnings},
          {"per_iteration", iterations}, {"per_example", examples},      {"totals", totals}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.mode = parse_boost_mode(j.at("mode").get<std::string>());
  r.config_echo = j.at("config_echo");
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& it : j.at("per_iteration")) {
    IterationReport ir;
    ir.iteration = it.at("iteration").get<std::size_t>();
    ir.boost_fold = optional_from<std::size_t>(it, "boost_fold");
    ir.valid_fold = optional_from<std::size_t>(it, "valid_fold");
    ir.train_folds = it.at("train_folds").get<std::vector<std::size_t>>();
    ir.n_train = it.at("n_train").get<std::size_t>();
    ir.n_valid = it.at("n_valid").get<std::size_t>();
    ir.n_boost = it.at("n_boost").get<std::size_t>();
    ir.validation_metric = optional_from<double>(it, "validation_metric");
    ir.selection = it.at("selection").get<std::string>();
    ir.median_perplexity = optional_from<double>(it, "median_perplexity");
    ir.counts = trace_from_json(it);
    r.per_iteration.push_back(std::move(ir));
  }
  for (const auto& ex : j.at("per_example"))
    r.per_example.push_back(
        {ex.at("origin_id").get<std::size_t>(), ex.at("fold_iteration").get<std::size_t>(), trace_from_json(ex)});
  const auto& totals = j.at("totals");
  r.totals = trace_from_json(totals);
  r.output_size = totals.at("output_size").get<std::size_t>();
  r.survivor_rate_delta = optional_from<double>(totals, "survivor_rate_delta");
  return r;
}

namespace {

struct IterationSpec {
  std::size_t iteration = 0;
  std::optional<std::size_t> boost_fold;
  std::optional<std::size_t> valid_fold;
  std::vector<std::size_t> train_folds;
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> valid_ids;
  std::vector<std::size_t> boost_ids;
};

struct PreparedIteration {
  std::unique_ptr<SurrogateModel> model;
  std::unique_ptr<SurrogateModel> proposer;  // only when the model offers no proposals
  std::optional<double> median_perplexity;
};

std::string iteration_context(const IterationSpec& spec) {
  std::string ctx = "iteration " + std::to_string(spec.iteration);
  if (spec.boost_fold) ctx += " (boost fold " + std::to_string(*spec.boost_fold) + ")";
  return ctx;
}

template <typename Fn>
auto with_context(const std::string& ctx, Fn&& fn) {
  try {
    return fn();
  } catch (const ScorerError& e) {
    throw ScorerError(ctx + ": " + e.what(), e.raw());
  } catch (const ConfigError& e) {
    throw ConfigError(ctx + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(ctx + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ctx + ": " + e.what());
  }
}

double median(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of an empty set");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void require_labels(const Dataset& dataset, const IterationSpec& spec) {
  std::vector<bool> seen(dataset.labels.size(), false);
  for (auto id : spec.train_ids) seen[*dataset.labels.index_of(dataset.examples[id].label)] = true;
  for (std::size_t l = 0; l < seen.size(); ++l) {
    if (seen[l]) continue;
    std::string folds;
    for (auto f : spec.train_folds) folds += (folds.empty() ? "" : ",") + std::to_string(f);
    throw ConfigError("training folds {" + folds + "} contain no example of label '" + dataset.labels[l] + "'");
  }
}

Example materialize(const AugmentationCandidate& cand, const Example& origin, std::size_t id) {
  Example ex;
  ex.id = id;
  ex.text = cand.text;
  ex.label = origin.label;
  if (origin.aspect && cand.aspect_span) {
    const auto tokens = tokenize(cand.text);
    const auto& span = *cand.aspect_span;
    ex.aspect = detokenize(std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(span.begin),
                                                    tokens.begin() + static_cast<std::ptrdiff_t>(span.end)));
    ex.aspect_span = span;
  }
  return ex;
}

struct ExampleOutcome {
  std::size_t iteration = 0;
  FilterOutcome outcome;
};

AugmentedDataset assemble(const Dataset& dataset, const BoostRunConfig& config, std::vector<ExampleOutcome> outcomes,
                          RunReport report) {
  AugmentedDataset out;
  out.dataset.labels = dataset.labels;
  out.dataset.task = dataset.task;
  for (const auto& origin : dataset.examples) {
    auto& result = outcomes[origin.id];
    if (config.include_originals) {
      Example ex = origin;
      ex.id = out.dataset.examples.size();
      out.dataset.examples.push_back(std::move(ex));
    }
    auto survivors = std::move(result.outcome.survivors);
    std::sort(survivors.begin(), survivors.end(),
              [](const auto& a, const auto& b) { return a.draw_index < b.draw_index; });
    for (const auto& cand : survivors) {
      const auto id = out.dataset.examples.size();
      out.dataset.examples.push_back(materialize(cand, origin, id));
      ProvenanceRecord rec;
      rec.output_index = id;
      rec.origin_id = origin.id;
      rec.backend = cand.backend;
      rec.fold_iteration = cand.fold_iteration;
      rec.draw_index = cand.draw_index;
      rec.perplexity = cand.perplexity.value_or(0.0);
      rec.confidence = cand.confidence.value_or(std::vector<double>{});
      rec.predicted_label = cand.predicted_label.value_or("");
      out.provenance.push_back(std::move(rec));
    }
    report.per_example.push_back({origin.id, result.iteration, result.outcome.trace});
    report.totals += result.outcome.trace;
  }
  report.output_size = out.dataset.size();
  out.report = std::move(report);
  return out;
}

AugmentedDataset run_iterations(const Dataset& dataset, const BoostRunConfig& config,
                                const BackendResources& resources, const SurrogateFactory& factory,
                                const std::vector<IterationSpec>& specs, RunReport report) {
  std::vector<PreparedIteration> prepared(specs.size());
  parallel_for(specs.size(), config.jobs, [&](std::size_t s) {
    const auto& spec = specs[s];
    with_context(iteration_context(spec), [&] {
      require_labels(dataset, spec);
      const auto train = dataset.subset(spec.train_ids);
      const auto valid = dataset.subset(spec.valid_ids);
      auto& prep = prepared[s];
      prep.model = factory(train, valid, spec.iteration);
      if (!prep.model) throw ConfigError("surrogate factory returned no model");
      auto prov = prep.model->provenance();
      prov.fold_iteration = spec.iteration;
      prov.train_ids = spec.train_ids;
      prep.model->set_provenance(std::move(prov));
      if (config.transform.strategy == Strategy::EmbedSub && !prep.model->offers_proposals())
        prep.proposer = train_lightweight(train, Dataset{{}, train.labels, train.task}, config.train, config.seed);
      if (config.filter.perplexity_mode == PerplexityMode::Relative &&
          config.filter.is_enabled(FilterStage::Perplexity)) {
        // Reference level: the originals being augmented, scored like their candidates will be.
        std::vector<double> ppl;
        for (auto id : spec.boost_ids) ppl.push_back(pseudo_perplexity(*prep.model, dataset.examples[id].text));
        prep.median_perplexity = median(std::move(ppl));
      }
      return 0;
    });
  });

  struct Task {
    std::size_t spec;
    std::size_t example;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < specs.size(); ++s)
    for (auto id : specs[s].boost_ids) tasks.push_back({s, id});

  const std::size_t pool = config.pool_multiplier * config.filter.keep_per_example;
  std::vector<ExampleOutcome> outcomes(dataset.size());
  parallel_for(tasks.size(), config.jobs, [&](std::size_t t) {
    const auto& task = tasks[t];
    const auto& spec = specs[task.spec];
    const auto& prep = prepared[task.spec];
    const auto& example = dataset.examples[task.example];
    with_context(iteration_context(spec), [&] {
      const SurrogateModel* proposer = prep.proposer ? prep.proposer.get() : prep.model.get();
      auto cands = generate(example, pool, config.transform, resources, proposer, config.seed);
      for (auto& c : cands) c.fold_iteration = spec.iteration;
      outcomes[task.example] = {spec.iteration,
                                filter_chain(example, std::move(cands), *prep.model, config.filter,
                                             prep.median_perplexity)};
      return 0;
    });
  });

  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& spec = specs[s];
    IterationReport ir;
    ir.iteration = spec.iteration;
    ir.boost_fold = spec.boost_fold;
    ir.valid_fold = spec.valid_fold;
    ir.train_folds = spec.train_folds;
    ir.n_train = spec.train_ids.size();
    ir.n_valid = spec.valid_ids.size();
    ir.n_boost = spec.boost_ids.size();
    ir.validation_metric = prepared[s].model->provenance().validation_metric;
    ir.selection = prepared[s].model->provenance().selection;
    ir.median_perplexity = prepared[s].median_perplexity;
    for (auto id : spec.boost_ids) ir.counts += outcomes[id].outcome.trace;
    report.per_iteration.push_back(std::move(ir));
  }

  auto result = assemble(dataset, config, std::move(outcomes), std::move(report));
  for (const auto& spec : specs) result.iteration_train_ids.push_back(spec.train_ids);
  return result;
}

RunReport new_report(const BoostRunConfig& config) {
  RunReport r;
  r.mode = config.mode;
  r.config_echo = to_json(config);
  return r;
}

}  // namespace

AugmentedDataset boost_augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources,
                               const SurrogateFactory& factory) {
  auto cfg = config;
  cfg.mode = BoostMode::Cross;
  cfg.validate();
  dataset.validate();
  const auto plan = make_fold_plan(dataset, cfg.k, cfg.seed);
  std::vector<IterationSpec> specs;
  for (const auto& it : plan.iterations) {
    IterationSpec spec;
    spec.iteration = it.boost_fold;
    spec.boost_fold = it.boost_fold;
    spec.valid_fold = it.valid_fold;
    spec.train_folds = it.train_folds;
    spec.train_ids = plan.members(it.train_folds);
    spec.valid_ids = plan.fold_members(it.valid_fold);
    spec.boost_ids = plan.fold_members(it.boost_fold);
    specs.push_back(std::move(spec));
  }
  return run_iterations(dataset, cfg, resources, factory, specs, new_report(cfg));
}

AugmentedDataset mono_augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources,
                              const SurrogateFactory& factory) {
  auto cfg = config;
  cfg.mode = BoostMode::Mono;
  cfg.validate();
  dataset.validate();
  auto report = new_report(cfg);
  report.warnings.push_back("k=" + std::to_string(cfg.k) +
                            " is ignored in mono mode: one surrogate is trained on the whole dataset");
  IterationSpec spec;
  spec.iteration = 0;
  for (std::size_t id = 0; id < dataset.size(); ++id) {
    spec.train_ids.push_back(id);
    spec.boost_ids.push_back(id);
  }
  return run_iterations(dataset, cfg, resources, factory, {spec}, std::move(report));
}

AugmentedDataset augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources,
                         const SurrogateFactory& factory) {
  return config.mode == BoostMode::Cross ? boost_augment(dataset, config, resources, factory)
                                         : mono_augment(dataset, config, resources, factory);
}

AugmentedDataset raw_augment(const Dataset& dataset, const BoostRunConfig& config, const BackendResources& resources) {
  config.transform.validate();
  config.filter.validate();
  dataset.validate();
  std::unique_ptr<SurrogateModel> proposer;
  if (config.transform.strategy == Strategy::EmbedSub)
    proposer = train_lightweight(dataset, Dataset{{}, dataset.labels, dataset.task}, config.train, config.seed);

  const std::size_t keep = config.filter.keep_per_example;
  std::vector<ExampleOutcome> outcomes(dataset.size());
  parallel_for(dataset.size(), config.jobs, [&](std::size_t id) {
    auto cands = generate(dataset.examples[id], keep, config.transform, resources, proposer.get(), config.seed);
    auto& out = outcomes[id];
    out.outcome.trace.generated = cands.size();
    out.outcome.trace.survived = cands.size();
    out.outcome.survivors = std::move(cands);
  });
  auto report = new_report(config);
  report.warnings.push_back("raw backend output: no surrogate filtering applied");
  return assemble(dataset, config, std::move(outcomes), std::move(report));
}

std::vector<ProvenanceRecord> overlap_violations(const AugmentedDataset& result) {
  std::vector<ProvenanceRecord> out;
  for (const auto& rec : result.provenance) {
    if (rec.fold_iteration >= result.iteration_train_ids.size()) {
      out.push_back(rec);
      continue;
    }
    const auto& ids = result.iteration_train_ids[rec.fold_iteration];
    if (std::binary_search(ids.begin(), ids.end(), rec.origin_id)) out.push_back(rec);
  }
  return out;
}

RunReport run_report(const AugmentedDataset& result) { return result.report; }

}  // namespace boostaug
