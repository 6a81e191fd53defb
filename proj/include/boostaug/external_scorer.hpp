#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "boostaug/corpus.hpp"
#include "boostaug/surrogate.hpp"

namespace boostaug {

// Line-delimited JSON scorer protocol.
//   request:  {"id": <int>, "text": <string>, "aspect": <string|null>, "labels": [<string>...]}
//   response: {"id": <int>, "perplexity": <float >= 1>, "confidence": [<float>...], "label": <string>}
// One response per request, in request order.

struct ScoreRequest {
  std::int64_t id = 0;
  std::string text;
  std::optional<std::string> aspect;
  std::vector<std::string> labels;
};

std::string encode_request(const ScoreRequest& request);
/// Throws ScorerError on malformed input.
ScoreRequest decode_request(std::string_view line);

std::string encode_response(std::int64_t id, const ScoreTriple& triple);
/// Parses and validates a response against the contract; a label tied for the
/// maximum is normalised to the lowest-index maximal label. Throws ScorerError
/// carrying the raw line on any violation, including an id mismatch.
ScoreTriple decode_response(std::string_view line, std::int64_t expected_id, const LabelSet& labels);

/// One request/response exchange with a scorer.
class ScorerTransport {
 public:
  virtual ~ScorerTransport() = default;
  virtual std::string exchange(const std::string& request_line) = 0;
};

/// Child process started through /bin/sh; requests go to its stdin, responses
/// are read from its stdout. stderr is inherited.
class ProcessTransport final : public ScorerTransport {
 public:
  ProcessTransport(const std::string& command, std::chrono::milliseconds timeout);
  ~ProcessTransport() override;
  ProcessTransport(const ProcessTransport&) = delete;
  ProcessTransport& operator=(const ProcessTransport&) = delete;

  std::string exchange(const std::string& request_line) override;

 private:
  std::string read_line();

  std::string command_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  int pid_ = -1;
  std::string buffer_;
};

/// POSTs each request body to an http:// endpoint; the response body is the reply.
class HttpTransport final : public ScorerTransport {
 public:
  HttpTransport(const std::string& endpoint, std::chrono::milliseconds timeout);
  ~HttpTransport() override;
  std::string exchange(const std::string& request_line) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// SurrogateModel whose scores come over the wire. Requests on one connection
/// are serialised.
class ExternalScorer final : public SurrogateModel {
 public:
  ExternalScorer(std::unique_ptr<ScorerTransport> transport, LabelSet labels);

  const LabelSet& labels() const override { return labels_; }
  ScoreTriple score(std::string_view text, std::optional<std::string_view> aspect) const override;

 private:
  std::unique_ptr<ScorerTransport> transport_;
  LabelSet labels_;
  mutable std::mutex mutex_;
  mutable std::int64_t next_id_ = 0;
};

inline constexpr std::chrono::milliseconds kDefaultScorerTimeout{30000};

/// `http://host:port/path` connects over HTTP; anything else is run as a shell command.
std::unique_ptr<ExternalScorer> connect_external_scorer(const std::string& command_or_endpoint, const LabelSet& labels,
                                                        std::chrono::milliseconds timeout = kDefaultScorerTimeout);

}  // namespace boostaug
