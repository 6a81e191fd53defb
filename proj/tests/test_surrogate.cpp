#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "boostaug/errors.hpp"
#include "boostaug/surrogate.hpp"
#include "boostaug/tokenize.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace boostaug;

namespace {

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

std::unique_ptr<LightweightModel> fit(const Dataset& d) {
  return train_lightweight(d, Dataset{{}, d.labels, d.task}, {}, 0);
}

}  // namespace

TEST_SUITE("surrogate") {

TEST_CASE("naive Bayes posterior matches a direct computation") {
  const auto d = twenty();
  for (double alpha : {0.1, 0.5, 1.0}) {
    SurrogateTrainConfig cfg;
    cfg.smoothing_alpha = alpha;
    const auto nb = train_naive_bayes(d, Dataset{{}, d.labels, d.task}, cfg);
    for (const std::string text : {"a good film", "BAD plot , awful", "unseen words only", "the film was in may",
                                   "great great great bad"}) {
      const auto got = nb.posterior(tokenize(text));
      const auto want = oracle::nb_posterior(d, alpha, text);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-9);
    }
  }
}

TEST_CASE("equal evidence gives equal posteriors") {
  const auto d = testing::tc({{"pos", "the good"}, {"neg", "the bad"}});
  const auto m = fit(d);
  const auto c = m->score("the", std::nullopt).confidence;
  CHECK(c[0] == doctest::Approx(0.5));
  CHECK(c[1] == doctest::Approx(0.5));
  CHECK(m->score("the", std::nullopt).label == "pos");
}

TEST_CASE("separable corpus is classified perfectly") {
  const auto d = testing::tc({{"pos", "good good"}, {"neg", "bad bad"}, {"pos", "good film"}, {"neg", "bad film"}});
  const auto m = fit(d);
  CHECK(classification_metric(m->classifier(), d, CheckpointMetric::Accuracy) == 1.0);
  CHECK(m->score("good", std::nullopt).max_confidence() > 0.7);
}

TEST_CASE("a model with no counts is uniform over its vocabulary") {
  NgramLanguageModel lm(1, 1.0);
  const std::vector<std::string> words{"a", "b", "c", "d", "e", "f", "g"};
  lm.add_vocabulary(words);
  const double v = static_cast<double>(lm.effective_vocabulary());
  CHECK(v == 9);
  CHECK(std::abs(lm.perplexity({"a", "b", "zzz"}) - v) < 1e-9);
  NgramLanguageModel bigram(2, 0.3);
  bigram.add_vocabulary(words);
  CHECK(std::abs(bigram.perplexity({"c", "c", "a", "q"}) - v) < 1e-9);
}

TEST_CASE("ngram conditionals are smoothed relative frequencies") {
  NgramLanguageModel lm(2, 1.0);
  lm.observe({"a", "b"});
  lm.observe({"a", "c"});
  // vocabulary {a,b,c} + OOV + end = 5 outcomes; history <s> seen twice, always followed by a.
  const auto p = lm.conditionals({"a", "b"});
  CHECK(p[0] == doctest::Approx((2.0 + 1.0) / (2.0 + 5.0)));
  CHECK(p[1] == doctest::Approx((1.0 + 1.0) / (2.0 + 5.0)));
  CHECK(lm.perplexity({"a", "b"}) == doctest::Approx(1.0 / std::sqrt(p[0] * p[1])));
  CHECK_THROWS_AS(lm.perplexity({}), ConfigError);
  CHECK_THROWS_AS(NgramLanguageModel(0, 1.0), ConfigError);
}

TEST_CASE("inserting an unseen token raises perplexity") {
  const auto d = twenty();
  const auto m = fit(d);
  for (const auto& e : d.examples) {
    const auto toks = tokenize(e.text);
    const double base = m->language_model().perplexity(toks);
    for (std::size_t at = 0; at <= toks.size(); ++at) {
      auto longer = toks;
      longer.insert(longer.begin() + static_cast<std::ptrdiff_t>(at), "qzxv");
      CHECK(m->language_model().perplexity(longer) > base);
    }
  }
}

TEST_CASE("score triples satisfy the contract") {
  const auto d = twenty();
  const auto m = fit(d);
  for (const std::string text : {"good", "an entirely unseen sentence", "bad bad bad !", "x"}) {
    const auto t = m->score(text, std::nullopt);
    CHECK(t.perplexity >= 1.0);
    CHECK_NOTHROW(check_score_triple(t, m->labels()));
  }
  CHECK_THROWS_AS(m->score("   ", std::nullopt), ConfigError);
  CHECK_THROWS_AS(pseudo_perplexity(*m, ""), ConfigError);
}

TEST_CASE("contract checks") {
  const LabelSet labels(std::vector<std::string>{"pos", "neg"});
  CHECK_THROWS_AS(check_score_triple({1.0, {0.5, 0.3}, "pos"}, labels), ScorerError);
  CHECK_THROWS_AS(check_score_triple({0.9, {0.5, 0.5}, "pos"}, labels), ScorerError);
  CHECK_THROWS_AS(check_score_triple({1.0, {0.2, 0.8}, "pos"}, labels), ScorerError);
  CHECK_THROWS_AS(check_score_triple({1.0, {1.0}, "pos"}, labels), ScorerError);
  CHECK_THROWS_AS(check_score_triple({NAN, {0.5, 0.5}, "pos"}, labels), ScorerError);
  CHECK_NOTHROW(check_score_triple({1.0, {0.5, 0.5}, "neg"}, labels));
}

TEST_CASE("argmax ties resolve to the lowest index and ignore scale") {
  CHECK(argmax_lowest({0.2, 0.4, 0.4}) == 1);
  CHECK(argmax_lowest({1, 1, 1}) == 0);
  const std::vector<double> v{0.1, 0.7, 0.2};
  std::vector<double> scaled;
  for (double x : v) scaled.push_back(x * 37.5);
  CHECK(argmax_lowest(v) == argmax_lowest(scaled));
}

TEST_CASE("empty validation uses the configured settings") {
  SurrogateTrainConfig cfg;
  cfg.ngram_order = 3;
  cfg.smoothing_alpha = 0.5;
  const auto d = twenty();
  const auto m = train_lightweight(d, Dataset{{}, d.labels, d.task}, cfg, 0);
  CHECK(m->language_model().order() == 3);
  CHECK(m->language_model().alpha() == 0.5);
  CHECK(m->classifier().alpha() == 0.5);
}

TEST_CASE("validation selects from the smoothing grid") {
  const auto d = twenty();
  const auto train = d.subset({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13});
  const auto valid = d.subset({14, 15, 16, 17, 18, 19});
  const auto m = train_lightweight(train, valid, {}, 0);
  const std::set<double> grid(std::begin(kSmoothingGrid), std::end(kSmoothingGrid));
  CHECK(grid.count(m->classifier().alpha()) == 1);
  CHECK(grid.count(m->language_model().alpha()) == 1);
  CHECK(m->provenance().validation_metric.has_value());
}

TEST_CASE("a label without training examples is an error") {
  auto d = testing::tc({{"pos", "good"}, {"neg", "bad"}});
  d.labels.add("neu");
  CHECK_THROWS_AS(train_lightweight(d, Dataset{{}, d.labels, d.task}, {}, 0), ConfigError);
}

TEST_CASE("training is deterministic") {
  const auto d = twenty();
  const auto a = fit(d);
  const auto b = fit(d);
  for (const auto& e : d.examples) CHECK(a->score(e.text, std::nullopt) == b->score(e.text, std::nullopt));
}

}  // TEST_SUITE
