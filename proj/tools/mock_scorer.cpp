// Reference scorer for the line-delimited JSON protocol.
//
//   mock_scorer --train t.tsv [--valid v.tsv] [--config c.json] [--task tc]
//       scores with the built-in lightweight model trained on the given folds
//   mock_scorer --script s.jsonl
//       replies from a table of {"text": ..., "perplexity": ..., "confidence": [...], "label": ...}
//
// --fault injects a protocol violation from request --fault-at on, and
// --http-port serves the same replies over HTTP instead of stdin/stdout.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "boostaug/corpus.hpp"
#include "boostaug/errors.hpp"
#include "boostaug/external_scorer.hpp"
#include "boostaug/surrogate.hpp"

using namespace boostaug;
using json = nlohmann::json;

namespace {

struct Options {
  std::string train;
  std::string valid;
  std::string config;
  std::string task = "tc";
  std::string script;
  std::string fault;
  std::size_t fault_at = 0;
  int http_port = -1;
};

SurrogateTrainConfig read_train_config(const std::string& path) {
  SurrogateTrainConfig c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  const json j = json::parse(in);
  if (j.contains("checkpoint_metric")) c.checkpoint_metric = parse_checkpoint_metric(j["checkpoint_metric"].get<std::string>());
  if (j.contains("ngram_order")) c.ngram_order = j["ngram_order"].get<std::size_t>();
  if (j.contains("smoothing_alpha")) c.smoothing_alpha = j["smoothing_alpha"].get<double>();
  return c;
}

Dataset with_labels(Dataset d, const LabelSet& labels) {
  for (const auto& l : d.labels.tokens())
    if (!labels.contains(l)) throw ConfigError("request labels lack '" + l + "'");
  d.labels = labels;
  return d;
}

class Responder {
 public:
  explicit Responder(Options opt) : opt_(std::move(opt)) {
    if (!opt_.script.empty()) {
      std::ifstream in(opt_.script);
      if (!in) throw ConfigError("cannot read " + opt_.script);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        script_[j.at("text").get<std::string>()] = j;
      }
    }
  }

  // Returns the reply line, or nullopt to stay silent.
  std::optional<std::string> reply(const std::string& line) {
    const auto request = decode_request(line);
    ++served_;
    json response;
    if (!opt_.script.empty()) {
      const auto it = script_.find(request.text);
      if (it == script_.end()) throw ScorerError("no scripted reply for text", request.text);
      response = it->second;
      response.erase("text");
      response["id"] = request.id;
    } else {
      ensure_model(request.labels);
      const auto triple = model_->score(request.text, request.aspect);
      response = json::parse(encode_response(request.id, triple));
    }
    if (!opt_.fault.empty() && served_ > opt_.fault_at) return inject(response);
    return response.dump();
  }

 private:
  void ensure_model(const std::vector<std::string>& request_labels) {
    if (model_) return;
    if (opt_.train.empty()) throw ConfigError("either --train or --script is required");
    const LabelSet labels(request_labels);
    const Task task = parse_task(opt_.task);
    const Dataset train = with_labels(load_dataset(opt_.train, task), labels);
    Dataset valid{{}, labels, task};
    if (!opt_.valid.empty()) {
      // An empty validation fold is written as an empty file, which the loaders reject.
      std::ifstream probe(opt_.valid);
      if (probe.peek() != std::ifstream::traits_type::eof()) valid = with_labels(load_dataset(opt_.valid, task), labels);
    }
    model_ = train_lightweight(train, valid, read_train_config(opt_.config), 0);
  }

  std::optional<std::string> inject(json response) {
    const auto& f = opt_.fault;
    if (f == "wrong-id") response["id"] = response["id"].get<std::int64_t>() + 1;
    else if (f == "bad-sum") response["confidence"][0] = response["confidence"][0].get<double>() + 0.5;
    else if (f == "low-perplexity") response["perplexity"] = 0.5;
    else if (f == "unknown-label") response["label"] = "no-such-label";
    else if (f == "missing-field") response.erase("confidence");
    else if (f == "not-json") return std::string("this is not json");
    else if (f == "silent") return std::nullopt;
    else if (f == "crash") std::exit(3);
    else throw ConfigError("unknown fault '" + f + "'");
    return response.dump();
  }

  Options opt_;
  std::map<std::string, json> script_;
  std::unique_ptr<LightweightModel> model_;
  std::size_t served_ = 0;
};

int serve_stdio(Responder& responder) {
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    const auto reply = responder.reply(line);
    if (!reply) continue;
    std::cout << *reply << '\n' << std::flush;
  }
  return 0;
}

int serve_http(Responder& responder, int port) {
  httplib::Server server;
  std::mutex mutex;
  server.Post(".*", [&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex);
    try {
      const auto reply = responder.reply(req.body);
      if (!reply) {
        std::this_thread::sleep_for(std::chrono::seconds(60));
        return;
      }
      res.set_content(*reply, "application/json");
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
    }
  });
  const int bound = port == 0 ? server.bind_to_any_port("127.0.0.1") : (server.bind_to_port("127.0.0.1", port) ? port : -1);
  if (bound < 0) {
    std::cerr << "mock_scorer: cannot bind port " << port << '\n';
    return 1;
  }
  std::cout << bound << '\n' << std::flush;
  server.listen_after_bind();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"line-delimited JSON reference scorer"};
  app.add_option("--train", opt.train, "training fold");
  app.add_option("--valid", opt.valid, "validation fold");
  app.add_option("--config", opt.config, "training settings (JSON)");
  app.add_option("--task", opt.task, "tc or absc");
  app.add_option("--script", opt.script, "scripted replies (JSON lines)");
  app.add_option("--fault", opt.fault, "wrong-id, bad-sum, low-perplexity, unknown-label, missing-field, not-json, silent, crash");
  app.add_option("--fault-at", opt.fault_at, "number of well-formed replies before the fault");
  app.add_option("--http-port", opt.http_port, "serve over HTTP on 127.0.0.1 (0 picks a port and prints it)");
  CLI11_PARSE(app, argc, argv);

  try {
    Responder responder(opt);
    return opt.http_port >= 0 ? serve_http(responder, opt.http_port) : serve_stdio(responder);
  } catch (const std::exception& e) {
    std::cerr << "mock_scorer: " << e.what() << '\n';
    return 1;
  }
}
