// One PASS/FAIL line per acceptance criterion. Exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>

#include <json.hpp>

#include "boostaug/boost.hpp"
#include "boostaug/errors.hpp"
#include "boostaug/evalharness.hpp"
#include "boostaug/external_scorer.hpp"
#include "boostaug/geometry.hpp"
#include "boostaug/shiftmetrics.hpp"
#include "boostaug/synthetic.hpp"
#include "chain_oracle.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace boostaug;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kAreaRelTol = 0.01;
constexpr double kOverlapTol = 1e-9;
constexpr double kGeometrySeconds = 10.0;
constexpr double kSkewTol = 1e-12;
constexpr double kTranslationTol = 1e-9;
constexpr double kPosteriorTol = 1e-9;
constexpr double kPerplexityTol = 1e-9;
constexpr double kProvenanceSeconds = 30.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::size_t workers() { return std::max(2u, std::thread::hardware_concurrency()); }

// --- 1 -------------------------------------------------------------------------------

Outcome geometry() {
  Outcome o;
  const auto start = Clock::now();
  Rng rng(1001);
  std::size_t mismatches = 0;
  double worst_area = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<Point2> pts;
    const bool grid = set % 2 == 0;  // half on a small grid to force collinear and repeated points
    for (std::size_t i = 0; i < n; ++i)
      pts.push_back(grid ? Point2{static_cast<double>(rng.below(5)), static_cast<double>(rng.below(5))}
                         : Point2{rng.uniform(), rng.uniform()});
    const auto hull = convex_hull(pts);
    const std::set<Point2> got(hull.vertices.begin(), hull.vertices.end());
    const auto want = oracle::hull_vertices(pts);
    if (got != want || got.size() != hull.vertices.size()) ++mismatches;

    if (set % 10 == 1 && !hull.degenerate) {
      const auto ring = oracle::ordered_ring(want);
      double lx = 1, hx = 0, ly = 1, hy = 0;
      for (const auto& p : ring) lx = std::min(lx, p.x), hx = std::max(hx, p.x), ly = std::min(ly, p.y), hy = std::max(hy, p.y);
      auto hits = [&](std::size_t samples) {
        std::size_t inside = 0;
        for (std::size_t s = 0; s < samples; ++s)
          inside += oracle::ring_contains(ring, {lx + (hx - lx) * rng.uniform(), ly + (hy - ly) * rng.uniform()});
        return static_cast<double>(inside) / static_cast<double>(samples);
      };
      // Thin hulls fill little of their box; size the run for about 160k hits.
      const double pilot = std::max(hits(20000), 1e-3);
      const auto samples = static_cast<std::size_t>(std::min(8e6, 160000.0 / pilot));
      const double mc = (hx - lx) * (hy - ly) * hits(samples);
      worst_area = std::max(worst_area, std::abs(polygon_area(hull) - mc) / mc);
    }
  }
  const auto square = [](double x0) {
    std::vector<Point2> p{{x0, 0}, {x0 + 1, 0}, {x0 + 1, 1}, {x0, 1}};
    return convex_hull(p);
  };
  const double third = overlap_rate(square(0), square(0.5));
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  o.require(mismatches == 0, std::to_string(mismatches) + " hull mismatches");
  o.require(worst_area < kAreaRelTol, "area error " + fmt("%.4f", worst_area));
  o.require(std::abs(third - 1.0 / 3.0) < kOverlapTol, "overlap " + fmt("%.12f", third));
  o.require(secs < kGeometrySeconds, "took " + fmt("%.1f", secs) + " s");
  if (o.pass)
    o.detail = "1000 hulls exact, worst area error " + fmt("%.4f", worst_area) + ", overlap " + fmt("%.12f", third) +
               ", " + fmt("%.2f", secs) + " s";
  return o;
}

// --- 2 -------------------------------------------------------------------------------

Outcome skew() {
  Outcome o;
  Rng rng(2002);
  double worst = 0.0, worst_sym = 0.0, worst_shift = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.below(200);
    std::vector<double> x;
    for (std::size_t i = 0; i < n; ++i) x.push_back(std::pow(rng.uniform(), 0.3 + 3 * rng.uniform()) * 10 - 2);
    worst = std::max(worst, std::abs(skewness(x).value - oracle::skewness(x)));

    std::vector<double> sym;
    for (std::size_t i = 0; i < n / 2 + 1; ++i) {
      const double v = rng.uniform() * 5;
      sym.push_back(1.5 + v);
      sym.push_back(1.5 - v);
    }
    worst_sym = std::max(worst_sym, std::abs(skewness(sym).value));

    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back({std::exp(rng.uniform() * 2), rng.uniform() * rng.uniform()});
    auto moved = c;
    const double dx = rng.uniform() * 100 - 50, dy = rng.uniform() * 100 - 50;
    for (auto& p : moved.points) p = {p.x + dx, p.y + dy};
    worst_shift = std::max(worst_shift, std::abs(global_skewness(c) - global_skewness(moved)));
  }
  o.require(worst <= kSkewTol, "formula error " + fmt("%.3g", worst));
  o.require(worst_sym <= kSkewTol, "symmetric skew " + fmt("%.3g", worst_sym));
  o.require(worst_shift <= kTranslationTol, "translation change " + fmt("%.3g", worst_shift));
  if (o.pass)
    o.detail = "max |error| " + fmt("%.2g", worst) + ", symmetric " + fmt("%.2g", worst_sym) + ", translation " +
               fmt("%.2g", worst_shift);
  return o;
}

// --- 3 -------------------------------------------------------------------------------

Dataset twenty() {
  return testing::tc({
      {"pos", "a good film with a great cast"},  {"neg", "a bad film with a poor plot"},
      {"pos", "great acting and a good score"},  {"neg", "awful acting and a dull score"},
      {"pos", "the plot was good"},              {"neg", "the plot was bad"},
      {"neu", "the film was released in may"},   {"neu", "it runs two hours"},
      {"pos", "Lovely music , great ending"},    {"neg", "terrible music , bad ending"},
      {"pos", "good good good"},                 {"neg", "bad bad"},
      {"neu", "the cast includes many actors"},  {"pos", "a wonderful and good story"},
      {"neg", "a dreadful and bad story"},       {"neu", "shot in two weeks"},
      {"pos", "I liked the film a lot"},         {"neg", "I hated the film"},
      {"neu", "the director made it in may"},    {"pos", "great !"},
  });
}

Outcome scorer_contract() {
  Outcome o;
  const auto d = twenty();
  const auto model = train_lightweight(d, Dataset{{}, d.labels, d.task}, {}, 0);
  double worst = 0.0;
  std::vector<std::string> probes;
  for (const auto& e : d.examples) probes.push_back(e.text);
  for (const std::string extra : {"good bad neutral words", "nothing seen here", "MAY the cast", "!"}) probes.push_back(extra);
  for (const auto& text : probes) {
    const auto got = model->score(text, std::nullopt).confidence;
    const auto want = oracle::nb_posterior(d, model->classifier().alpha(), text);
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  o.require(worst <= kPosteriorTol, "posterior error " + fmt("%.3g", worst));

  double worst_uniform = 0.0;
  for (std::size_t v : {1, 5, 50, 1000}) {
    NgramLanguageModel lm(2, 1.0);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < v; ++i) words.push_back("w" + std::to_string(i));
    lm.add_vocabulary(words);
    const double symbols = static_cast<double>(lm.effective_vocabulary());
    worst_uniform = std::max(worst_uniform, std::abs(lm.perplexity({"w0", "unseen", "w0"}) - symbols));
  }
  o.require(worst_uniform <= kPerplexityTol, "uniform perplexity error " + fmt("%.3g", worst_uniform));

  std::size_t checked = 0, violations = 0;
  for (const auto& e : d.examples) {
    const auto toks = tokenize(e.text);
    const double base = model->language_model().perplexity(toks);
    for (std::size_t at = 0; at <= toks.size(); ++at) {
      auto longer = toks;
      longer.insert(longer.begin() + static_cast<std::ptrdiff_t>(at), "zzqoov");
      ++checked;
      if (!(model->language_model().perplexity(longer) > base)) ++violations;
    }
  }
  o.require(violations == 0, std::to_string(violations) + " OOV insertions did not raise perplexity");
  if (o.pass)
    o.detail = "posterior error " + fmt("%.2g", worst) + ", uniform error " + fmt("%.2g", worst_uniform) + ", " +
               std::to_string(checked) + " OOV insertions all raise perplexity";
  return o;
}

// --- 4 -------------------------------------------------------------------------------

Outcome filter_chain_properties() {
  Outcome o;
  Rng rng(4004);
  std::size_t mismatch = 0, shrink = 0, over = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pool = oracle::random_pool(rng);
    auto f = oracle::random_config(rng);
    const double median = 1.0 + rng.uniform() * 8.0;
    const std::string truth = rng.bernoulli(0.5) ? "pos" : "neg";
    const Example origin{0, "origin", truth, std::nullopt, std::nullopt};
    const auto got = filter_scored(origin, pool, f, median);
    std::vector<std::size_t> draws;
    for (const auto& c : got.survivors) draws.push_back(c.draw_index);
    if (draws != oracle::reference_chain(pool, truth, f, median)) ++mismatch;
    if (got.survivors.size() > f.keep_per_example) ++over;

    auto loose = f;
    loose.confidence_threshold *= rng.uniform();
    loose.perplexity_limit += rng.uniform() * 5.0;
    loose.relative_ratio += rng.uniform();
    if (filter_scored(origin, pool, loose, median).survivors.size() < got.survivors.size()) ++shrink;
  }
  o.require(mismatch == 0, std::to_string(mismatch) + " pools differ from the composition");
  o.require(shrink == 0, std::to_string(shrink) + " relaxations shrank the survivors");
  o.require(over == 0, std::to_string(over) + " pools exceeded the keep count");
  if (o.pass) o.detail = "200 pools match the stage composition, monotone under relaxation, bounded by keep count";
  return o;
}

// --- 5 -------------------------------------------------------------------------------

Outcome provenance() {
  Outcome o;
  SyntheticConfig sc;
  sc.n_train = 500;
  const auto corpus = make_synthetic_corpus(sc);
  BoostRunConfig cfg;
  cfg.k = 5;
  cfg.seed = 55;
  cfg.jobs = workers();
  cfg.filter.perplexity_mode = PerplexityMode::Relative;
  const auto start = Clock::now();
  const auto result = boost_augment(corpus.train, cfg, {corpus.synonyms, corpus.misspellings},
                                    lightweight_factory(cfg.train, cfg.seed));
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  const auto plan = make_fold_plan(corpus.train, cfg.k, cfg.seed);
  std::size_t bad = 0;
  for (const auto& rec : result.provenance) {
    const auto fold = plan.assignment[rec.origin_id];
    const auto& it = plan.iterations[rec.fold_iteration];
    const bool in_train = std::find(it.train_folds.begin(), it.train_folds.end(), fold) != it.train_folds.end();
    if (fold != it.boost_fold || in_train) ++bad;
  }
  o.require(!result.provenance.empty(), "no survivors to check");
  o.require(bad == 0, std::to_string(bad) + " of " + std::to_string(result.provenance.size()) + " violate");
  o.require(overlap_violations(result).empty(), "library overlap check disagrees");
  o.require(secs < kProvenanceSeconds, "took " + fmt("%.1f", secs) + " s");
  if (o.pass)
    o.detail = std::to_string(result.provenance.size()) + " survivors, 0 from their surrogate's training folds, " +
               fmt("%.2f", secs) + " s";
  return o;
}

// --- 6 -------------------------------------------------------------------------------

Outcome label_constraint() {
  Outcome o;
  SyntheticConfig sc;
  sc.n_train = 200;
  const auto corpus = make_synthetic_corpus(sc);
  BoostRunConfig cfg;
  cfg.seed = 66;
  cfg.transform.eda_op_weights = {1, 0, 0, 0};
  cfg.transform.token_transform_prob = 0.5;
  cfg.filter.enabled = {FilterStage::Label};
  cfg.filter.keep_per_example = 16;
  cfg.pool_multiplier = 1;
  const BackendResources res{corpus.antonyms, {}};

  auto flipped = [&](const std::string& text, const std::string& label) {
    const auto [pos, neg] = corpus.keyword_counts(text);
    return label == "positive" ? neg > pos : pos > neg;
  };
  std::size_t generated_flipped = 0;
  for (const auto& e : corpus.train.examples)
    for (const auto& c : generate(e, 16, cfg.transform, res, nullptr, cfg.seed))
      if (flipped(c.text, e.label)) ++generated_flipped;

  const auto result = boost_augment(corpus.train, cfg, res, lightweight_factory(cfg.train, cfg.seed));
  std::size_t surviving_flipped = 0;
  for (const auto& rec : result.provenance)
    if (flipped(result.dataset.examples[rec.output_index].text, corpus.train.examples[rec.origin_id].label))
      ++surviving_flipped;
  o.require(generated_flipped > 0, "no flipped candidates were generated");
  o.require(result.report.totals.generated == result.report.totals.removed_label + result.report.totals.survived,
            "label stage counts do not add up");
  o.require(surviving_flipped == 0, std::to_string(surviving_flipped) + " flipped candidates survived");
  if (o.pass)
    o.detail = std::to_string(generated_flipped) + " flipped candidates generated, 0 survive (" +
               std::to_string(result.report.totals.removed_label) + " removed by the label stage)";
  return o;
}

// --- 7 and 8 share the synthetic setup --------------------------------------------

struct Study {
  SyntheticCorpus corpus;
  BackendResources resources;
  BoostRunConfig base;
};

Study study() {
  SyntheticConfig sc;
  sc.n_train = 300;
  sc.n_test = 300;
  Study s{make_synthetic_corpus(sc), {}, {}};
  s.resources = {s.corpus.noisy_synonyms, s.corpus.misspellings};
  s.base.filter.perplexity_mode = PerplexityMode::Relative;
  s.base.filter.relative_ratio = 1.5;
  s.base.jobs = workers();
  return s;
}

Outcome overlap_shift() {
  Outcome o;
  const auto s = study();
  const auto featurizer = LexicalFeaturizer::fit(s.corpus.train);
  double filtered = 0.0, unfiltered = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = s.base;
    cfg.seed = seed;
    const auto f = augment(s.corpus.train, cfg, s.resources, lightweight_factory(cfg.train, seed));
    const auto u = raw_augment(s.corpus.train, cfg, s.resources);
    const auto d = diagnose({{"filtered", f.dataset}, {"unfiltered", u.dataset}, {"test", s.corpus.test}}, featurizer,
                            {{"filtered", "test"}, {"unfiltered", "test"}}, EmbedMethod::Deterministic, seed);
    filtered += d.pairs[0].overlap_rate / 5;
    unfiltered += d.pairs[1].overlap_rate / 5;
  }
  o.require(filtered >= unfiltered, "filtered " + fmt("%.4f", filtered) + " < unfiltered " + fmt("%.4f", unfiltered));
  o.detail = "mean overlap with test: filtered " + fmt("%.4f", filtered) + ", unfiltered " + fmt("%.4f", unfiltered);
  return o;
}

Outcome sweep_trend() {
  Outcome o;
  const auto s = study();
  SweepConfig cfg;
  cfg.base = s.base;
  cfg.n_values = {2, 8};
  cfg.modes = {SweepMode::BoostAug, SweepMode::RawBackend};
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.jobs = workers();
  const auto r = sweep_n(s.corpus.train, s.corpus.test, cfg, s.resources);
  const auto& b2 = r.rows[0];
  const auto& b8 = r.rows[1];
  const auto& r2 = r.rows[2];
  const auto& r8 = r.rows[3];
  o.require(b8.f1_mean >= b2.f1_mean, "boosted F1 fell from n=2 to n=8");
  o.require(r8.f1_mean <= r2.f1_mean + r2.f1_stderr, "raw F1 rose by more than one standard error");
  o.detail = "boosted F1 " + fmt("%.4f", b2.f1_mean) + " -> " + fmt("%.4f", b8.f1_mean) + ", raw F1 " +
             fmt("%.4f", r2.f1_mean) + " (+/- " + fmt("%.4f", r2.f1_stderr) + ") -> " + fmt("%.4f", r8.f1_mean);
  return o;
}

// --- 9 -------------------------------------------------------------------------------

Outcome cli_determinism() {
  Outcome o;
  testing::TempDir dir;
  SyntheticConfig sc;
  sc.n_train = 120;
  sc.n_test = 60;
  const auto corpus = make_synthetic_corpus(sc);
  write_dataset(corpus.train, dir / "train.tsv");
  write_dataset(corpus.test, dir / "test.tsv");
  const std::string cli = BOOSTAUG_CLI;
  const std::string common = " --perplexity-mode relative --synonyms " RESOURCE_DIR "/synonyms.tsv";

  auto run_all = [&](const std::string& tag, int jobs) {
    const auto p = [&](const std::string& name) { return testing::quote(dir / (tag + name)); };
    const std::string j = " --jobs " + std::to_string(jobs);
    int status = 0;
    status |= testing::run(cli + " augment --input " + testing::quote(dir / "train.tsv") + " --out " + p("aug.tsv") +
                           " --report " + p("report.json") + " --provenance " + p("prov.tsv") + common + j)
                  .status;
    status |= testing::run(cli + " diagnose --train " + testing::quote(dir / "train.tsv") + " --test " +
                           testing::quote(dir / "test.tsv") + " --augmented " + p("aug.tsv") + " --report " +
                           p("diag.json") + " --points " + p("points.tsv") + j)
                  .status;
    status |= testing::run(cli + " sweep --input " + testing::quote(dir / "train.tsv") + " --test " +
                           testing::quote(dir / "test.tsv") + " --n 1,4 --seeds 2 --out " + p("sweep.tsv") + common + j)
                  .status;
    return status;
  };
  o.require(run_all("a_", 1) == 0, "a command failed");
  o.require(run_all("b_", 1) == 0, "a command failed");
  o.require(run_all("c_", 4) == 0, "a command failed");
  std::size_t compared = 0;
  for (const std::string f : {"aug.tsv", "report.json", "prov.tsv", "diag.json", "points.tsv", "sweep.tsv"}) {
    const auto a = testing::read_file(dir / ("a_" + f));
    o.require(!a.empty(), f + " is empty");
    o.require(a == testing::read_file(dir / ("b_" + f)), f + " differs between runs");
    o.require(a == testing::read_file(dir / ("c_" + f)), f + " differs between --jobs 1 and 4");
    ++compared;
  }
  if (o.pass) o.detail = std::to_string(compared) + " outputs byte-identical across reruns and --jobs 1/4";
  return o;
}

// --- 10 ------------------------------------------------------------------------------

Outcome external_scorer() {
  Outcome o;
  testing::TempDir dir;
  SyntheticConfig sc;
  sc.n_train = 100;
  const auto corpus = make_synthetic_corpus(sc);
  write_dataset(corpus.train, dir / "train.tsv");
  const std::string base = std::string(BOOSTAUG_CLI) + " augment --input " + testing::quote(dir / "train.tsv") +
                           " --perplexity-mode relative --synonyms " RESOURCE_DIR "/synonyms.tsv";
  const std::string mock = std::string(MOCK_SCORER) + " --train {train} --valid {valid} --config {config}";
  auto outputs = [&](const std::string& tag) {
    return base + " --out " + testing::quote(dir / (tag + ".tsv")) + " --provenance " +
           testing::quote(dir / (tag + "_prov.tsv")) + " --report " + testing::quote(dir / (tag + ".json"));
  };
  o.require(testing::run(outputs("local") + " --scorer lightweight").status == 0, "in-process run failed");
  o.require(testing::run(outputs("remote") + " --scorer 'exec:" + mock + "'").status == 0, "external run failed");
  o.require(testing::read_file(dir / "local.tsv") == testing::read_file(dir / "remote.tsv"), "datasets differ");
  o.require(testing::read_file(dir / "local_prov.tsv") == testing::read_file(dir / "remote_prov.tsv"),
            "provenance differs");
  const auto lj = json::parse(testing::read_file(dir / "local.json"));
  const auto rj = json::parse(testing::read_file(dir / "remote.json"));
  o.require(lj.at("totals") == rj.at("totals") && lj.at("per_example") == rj.at("per_example"), "counts differ");

  std::size_t rejected = 0;
  const std::vector<std::string> faults{"wrong-id",     "bad-sum",  "low-perplexity", "unknown-label",
                                        "missing-field", "not-json", "silent",         "crash"};
  for (const auto& fault : faults) {
    const auto out = dir / ("fault_" + fault + ".tsv");
    const auto r = testing::run(base + " --out " + testing::quote(out) + " --scorer-timeout-ms 1500 --scorer 'exec:" +
                                mock + " --fault " + fault + " --fault-at 3' 2>/dev/null");
    if (r.status == 1 && !std::filesystem::exists(out)) ++rejected;
    else o.require(false, fault + " was not rejected");
  }
  if (o.pass)
    o.detail = "external output byte-identical to in-process; " + std::to_string(rejected) + "/" +
               std::to_string(faults.size()) + " malformed-response kinds rejected";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"convex hull, area and overlap", geometry},
      {"skewness", skew},
      {"scorer contract", scorer_contract},
      {"filter chain", filter_chain_properties},
      {"no-overlap provenance", provenance},
      {"label constraint removes keyword flips", label_constraint},
      {"filtered set overlaps test at least as much as raw", overlap_shift},
      {"macro-F1 trend over n", sweep_trend},
      {"byte-identical CLI outputs", cli_determinism},
      {"external scorer parity and rejection", external_scorer},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto start = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("%s %2zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
