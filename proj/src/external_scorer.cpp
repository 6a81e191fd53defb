#include "boostaug/external_scorer.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "boostaug/errors.hpp"

extern char** environ;

namespace boostaug {

using json = nlohmann::json;

std::string encode_request(const ScoreRequest& request) {
  json j;
  j["id"] = request.id;
  j["text"] = request.text;
  j["aspect"] = request.aspect ? json(*request.aspect) : json(nullptr);
  j["labels"] = request.labels;
  return j.dump();
}

ScoreRequest decode_request(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ScorerError("request is not a JSON object", std::string(line));
  try {
    ScoreRequest r;
    r.id = j.at("id").get<std::int64_t>();
    r.text = j.at("text").get<std::string>();
    if (j.contains("aspect") && !j["aspect"].is_null()) r.aspect = j["aspect"].get<std::string>();
    r.labels = j.at("labels").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ScorerError(std::string("malformed request: ") + e.what(), std::string(line));
  }
}

std::string encode_response(std::int64_t id, const ScoreTriple& triple) {
  json j;
  j["id"] = id;
  j["perplexity"] = triple.perplexity;
  j["confidence"] = triple.confidence;
  j["label"] = triple.label;
  return j.dump();
}

ScoreTriple decode_response(std::string_view line, std::int64_t expected_id, const LabelSet& labels) {
  const std::string raw(line);
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ScorerError("response is not a JSON object", raw);
  for (const char* field : {"id", "perplexity", "confidence", "label"})
    if (!j.contains(field)) throw ScorerError(std::string("response lacks field '") + field + "'", raw);
  if (!j["id"].is_number_integer()) throw ScorerError("response id is not an integer", raw);
  if (j["id"].get<std::int64_t>() != expected_id)
    throw ScorerError("response id " + j["id"].dump() + " does not match request id " + std::to_string(expected_id), raw);
  if (!j["perplexity"].is_number()) throw ScorerError("perplexity is not a number", raw);
  if (!j["label"].is_string()) throw ScorerError("label is not a string", raw);
  if (!j["confidence"].is_array()) throw ScorerError("confidence is not an array", raw);

  ScoreTriple triple;
  triple.perplexity = j["perplexity"].get<double>();
  for (const auto& v : j["confidence"]) {
    if (!v.is_number()) throw ScorerError("confidence entry is not a number", raw);
    triple.confidence.push_back(v.get<double>());
  }
  triple.label = j["label"].get<std::string>();
  try {
    check_score_triple(triple, labels);
  } catch (const ScorerError& e) {
    throw ScorerError(e.what(), raw);
  }
  triple.label = labels[argmax_lowest(triple.confidence)];
  return triple;
}

// --- child process ----------------------------------------------------------------------

ProcessTransport::ProcessTransport(const std::string& command, std::chrono::milliseconds timeout)
    : command_(command), timeout_(timeout) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0)
    throw ScorerError(std::string("socketpair failed: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);

  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(fds[1]);
  if (rc != 0) {
    ::close(fds[0]);
    throw ScorerError("cannot start scorer '" + command + "': " + std::strerror(rc));
  }
  fd_ = fds[0];
  pid_ = pid;
}

ProcessTransport::~ProcessTransport() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_WR);  // EOF on the child's stdin
    ::close(fd_);
  }
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

std::string ProcessTransport::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw ScorerError("scorer '" + command_ + "' timed out", buffer_);
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char chunk[4096];
    const auto got = ::recv(fd_, chunk, sizeof chunk, 0);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw ScorerError(std::string("read from scorer failed: ") + std::strerror(errno));
    }
    if (got == 0) throw ScorerError("scorer '" + command_ + "' closed its output", buffer_);
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

std::string ProcessTransport::exchange(const std::string& request_line) {
  std::string out = request_line + '\n';
  std::size_t sent = 0;
  while (sent < out.size()) {
    const auto n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ScorerError("write to scorer '" + command_ + "' failed: " + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
  return read_line();
}

// --- HTTP ----------------------------------------------------------------------------------

struct HttpTransport::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string path;
  std::string endpoint;
};

HttpTransport::HttpTransport(const std::string& endpoint, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
  constexpr std::string_view scheme = "http://";
  if (endpoint.rfind(scheme, 0) != 0) throw ConfigError("scorer endpoint must start with http://: " + endpoint);
  const auto rest = endpoint.substr(scheme.size());
  const auto slash = rest.find('/');
  const auto host = rest.substr(0, slash);
  impl_->path = slash == std::string::npos ? "/" : rest.substr(slash);
  impl_->endpoint = endpoint;
  impl_->client = std::make_unique<httplib::Client>(std::string(scheme) + host);
  const auto secs = static_cast<time_t>(timeout.count() / 1000);
  const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
  impl_->client->set_connection_timeout(secs, usecs);
  impl_->client->set_read_timeout(secs, usecs);
  impl_->client->set_write_timeout(secs, usecs);
}

HttpTransport::~HttpTransport() = default;

std::string HttpTransport::exchange(const std::string& request_line) {
  auto res = impl_->client->Post(impl_->path, request_line, "application/json");
  if (!res) throw ScorerError("HTTP scorer " + impl_->endpoint + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ScorerError("HTTP scorer " + impl_->endpoint + " returned status " + std::to_string(res->status), res->body);
  std::string body = res->body;
  while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
  return body;
}

// --- scorer --------------------------------------------------------------------------------

ExternalScorer::ExternalScorer(std::unique_ptr<ScorerTransport> transport, LabelSet labels)
    : transport_(std::move(transport)), labels_(std::move(labels)) {
  if (labels_.size() < 2) throw ConfigError("external scorer needs at least 2 labels");
}

ScoreTriple ExternalScorer::score(std::string_view text, std::optional<std::string_view> aspect) const {
  ScoreRequest req;
  req.text = std::string(text);
  if (aspect) req.aspect = std::string(*aspect);
  req.labels = labels_.tokens();
  std::lock_guard lock(mutex_);
  req.id = next_id_++;
  const auto reply = transport_->exchange(encode_request(req));
  return decode_response(reply, req.id, labels_);
}

std::unique_ptr<ExternalScorer> connect_external_scorer(const std::string& command_or_endpoint, const LabelSet& labels,
                                                        std::chrono::milliseconds timeout) {
  std::unique_ptr<ScorerTransport> transport;
  if (command_or_endpoint.rfind("http://", 0) == 0)
    transport = std::make_unique<HttpTransport>(command_or_endpoint, timeout);
  else
    transport = std::make_unique<ProcessTransport>(command_or_endpoint, timeout);
  return std::make_unique<ExternalScorer>(std::move(transport), labels);
}

}  // namespace boostaug
