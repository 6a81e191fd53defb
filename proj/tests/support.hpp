#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "boostaug/corpus.hpp"
#include "boostaug/surrogate.hpp"
#include "boostaug/tokenize.hpp"

namespace testing {

namespace fs = std::filesystem;

using Entries = std::map<std::string, std::vector<std::string>>;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> n{0};
    path_ = fs::temp_directory_path() / ("boostaug-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline boostaug::Dataset tc(const std::vector<std::pair<std::string, std::string>>& rows) {
  boostaug::Dataset d;
  for (const auto& [label, text] : rows) {
    d.labels.add(label);
    d.examples.push_back({d.examples.size(), text, label, std::nullopt, std::nullopt});
  }
  return d;
}

/// Scores come from a function of the text alone.
class ScriptedModel final : public boostaug::SurrogateModel {
 public:
  using Fn = std::function<boostaug::ScoreTriple(const std::string&)>;
  ScriptedModel(boostaug::LabelSet labels, Fn fn) : labels_(std::move(labels)), fn_(std::move(fn)) {}
  const boostaug::LabelSet& labels() const override { return labels_; }
  boostaug::ScoreTriple score(std::string_view text, std::optional<std::string_view>) const override {
    return fn_(std::string(text));
  }

 private:
  boostaug::LabelSet labels_;
  Fn fn_;
};

struct CommandResult {
  int status = -1;
  std::string out;
};

/// Runs through /bin/sh, capturing stdout.
inline CommandResult run(const std::string& command) {
  CommandResult r;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

/// Background child whose first stdout line is captured; killed on destruction.
class Background {
 public:
  explicit Background(const std::vector<std::string>& argv) {
    int fds[2];
    if (::pipe(fds) != 0) return;
    pid_ = ::fork();
    if (pid_ == 0) {
      ::dup2(fds[1], 1);
      ::close(fds[0]);
      ::close(fds[1]);
      std::vector<char*> args;
      for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      ::execv(args[0], args.data());
      ::_exit(127);
    }
    ::close(fds[1]);
    char c;
    while (::read(fds[0], &c, 1) == 1 && c != '\n') first_line_ += c;
    ::close(fds[0]);
  }
  ~Background() {
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }
  const std::string& first_line() const { return first_line_; }

 private:
  pid_t pid_ = -1;
  std::string first_line_;
};

inline std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace testing
