#include <doctest.h>

#include <chrono>

#include "boostaug/boost.hpp"
#include "boostaug/errors.hpp"
#include "boostaug/external_scorer.hpp"
#include "boostaug/synthetic.hpp"
#include "support.hpp"

using namespace boostaug;
using namespace std::chrono_literals;
using testing::quote;

namespace {

const LabelSet kLabels(std::vector<std::string>{"pos", "neg"});

std::string script_file(const testing::TempDir& dir) {
  const auto path = dir / "script.jsonl";
  testing::write_file(path,
                      R"({"text": "good film", "perplexity": 3.5, "confidence": [0.9, 0.1], "label": "pos"})"
                      "\n"
                      R"({"text": "bad film", "perplexity": 7.25, "confidence": [0.2, 0.8], "label": "neg"})"
                      "\n");
  return path.string();
}

}  // namespace

TEST_SUITE("external") {

TEST_CASE("requests round-trip") {
  ScoreRequest r{7, "the \"quoted\" text", std::string("battery"), {"pos", "neg"}};
  const auto back = decode_request(encode_request(r));
  CHECK(back.id == 7);
  CHECK(back.text == r.text);
  CHECK(back.aspect == r.aspect);
  CHECK(back.labels == r.labels);
  r.aspect.reset();
  CHECK(!decode_request(encode_request(r)).aspect);
  CHECK_THROWS_AS(decode_request("[1,2]"), ScorerError);
}

TEST_CASE("responses round-trip exactly") {
  const ScoreTriple t{4.123456789012345, {0.1 + 0.2, 1.0 - (0.1 + 0.2)}, "neg"};
  CHECK(decode_response(encode_response(3, t), 3, kLabels) == t);
}

TEST_CASE("malformed responses are rejected with the raw line") {
  const char* bad[] = {
      R"({"id": 1, "perplexity": 2.0, "confidence": [0.5, 0.3], "label": "pos"})",
      R"({"id": 1, "perplexity": 0.5, "confidence": [0.5, 0.5], "label": "pos"})",
      R"({"id": 2, "perplexity": 2.0, "confidence": [0.5, 0.5], "label": "pos"})",
      R"({"id": 1, "perplexity": 2.0, "confidence": [0.5, 0.5], "label": "maybe"})",
      R"({"id": 1, "perplexity": 2.0, "confidence": [0.2, 0.8], "label": "pos"})",
      R"({"id": 1, "perplexity": 2.0, "label": "pos"})",
      R"({"id": 1, "perplexity": null, "confidence": [0.5, 0.5], "label": "pos"})",
      R"({"id": 1, "perplexity": 2.0, "confidence": [0.5, 0.5, 0.0], "label": "pos"})",
      R"({"id": "1", "perplexity": 2.0, "confidence": [0.5, 0.5], "label": "pos"})",
      "not json at all",
  };
  for (const char* line : bad) {
    try {
      decode_response(line, 1, kLabels);
      FAIL("accepted: " << line);
    } catch (const ScorerError& e) {
      CHECK(e.raw() == line);
    }
  }
}

TEST_CASE("a tied label is normalised to the lowest index") {
  const auto t = decode_response(R"({"id": 0, "perplexity": 2.0, "confidence": [0.5, 0.5], "label": "neg"})", 0, kLabels);
  CHECK(t.label == "pos");
}

TEST_CASE("scripted scorer over a child process") {
  testing::TempDir dir;
  auto scorer = connect_external_scorer(std::string(MOCK_SCORER) + " --script " + script_file(dir), kLabels, 5000ms);
  const auto a = scorer->score("good film", std::nullopt);
  CHECK(a == ScoreTriple{3.5, {0.9, 0.1}, "pos"});
  const auto b = scorer->score("bad film", std::string("film"));
  CHECK(b == ScoreTriple{7.25, {0.2, 0.8}, "neg"});
}

TEST_CASE("protocol faults surface as scorer errors") {
  testing::TempDir dir;
  const auto script = script_file(dir);
  for (const std::string fault :
       {"wrong-id", "bad-sum", "low-perplexity", "unknown-label", "missing-field", "not-json", "silent", "crash"}) {
    CAPTURE(fault);
    auto scorer = connect_external_scorer(
        std::string(MOCK_SCORER) + " --script " + script + " --fault " + fault + " --fault-at 1", kLabels, 1500ms);
    CHECK_NOTHROW(scorer->score("good film", std::nullopt));
    CHECK_THROWS_AS(scorer->score("bad film", std::nullopt), ScorerError);
  }
}

TEST_CASE("a command that does not exist fails on first use") {
  auto scorer = connect_external_scorer("/nonexistent/scorer-binary", kLabels, 2000ms);
  CHECK_THROWS_AS(scorer->score("x", std::nullopt), ScorerError);
}

TEST_CASE("scripted scorer over HTTP") {
  testing::TempDir dir;
  testing::Background server({MOCK_SCORER, "--script", script_file(dir), "--http-port", "0"});
  REQUIRE(!server.first_line().empty());
  const std::string endpoint = "http://127.0.0.1:" + server.first_line() + "/score";
  auto scorer = connect_external_scorer(endpoint, kLabels, 5000ms);
  CHECK(scorer->score("good film", std::nullopt) == ScoreTriple{3.5, {0.9, 0.1}, "pos"});
  CHECK_THROWS_AS(scorer->score("unscripted text", std::nullopt), ScorerError);
  CHECK_THROWS_AS(connect_external_scorer("http://", kLabels, 500ms)->score("x", std::nullopt), Error);
}

TEST_CASE("external lightweight scorer reproduces the in-process run") {
  SyntheticConfig sc;
  sc.n_train = 60;
  const auto corpus = make_synthetic_corpus(sc);
  BoostRunConfig cfg;
  cfg.seed = 5;
  cfg.filter.perplexity_mode = PerplexityMode::Relative;
  BackendResources res{corpus.synonyms, corpus.misspellings};
  testing::TempDir dir;
  const auto local = boost_augment(corpus.train, cfg, res, lightweight_factory(cfg.train, cfg.seed));
  const auto remote = boost_augment(
      corpus.train, cfg, res,
      external_factory(std::string(MOCK_SCORER) + " --train {train} --valid {valid} --config {config}", cfg.train,
                       dir.path(), 10000ms));
  CHECK(serialize_dataset(local.dataset) == serialize_dataset(remote.dataset));
  // Selection details stay inside the external process; the counts must agree.
  const auto lj = to_json(local.report), rj = to_json(remote.report);
  CHECK(lj.at("per_example") == rj.at("per_example"));
  CHECK(lj.at("totals") == rj.at("totals"));
  REQUIRE(local.provenance.size() == remote.provenance.size());
  for (std::size_t i = 0; i < local.provenance.size(); ++i) {
    CHECK(local.provenance[i].perplexity == remote.provenance[i].perplexity);
    CHECK(local.provenance[i].confidence == remote.provenance[i].confidence);
  }
}

}  // TEST_SUITE
