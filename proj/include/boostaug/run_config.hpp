#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boostaug/boost.hpp"
#include "boostaug/evalharness.hpp"
#include "boostaug/shiftmetrics.hpp"

namespace boostaug {

struct ScorerSpec {
  enum class Kind { Lightweight, Exec, Http };
  Kind kind = Kind::Lightweight;
  std::string target;  // command or endpoint

  /// "lightweight", "exec:<command>" or "http:<endpoint>".
  static ScorerSpec parse(std::string_view spec);
  std::string to_string() const;
};

enum class OptionKind { Integer, Number, Boolean, String, IntegerList, NumberList, StringList };

/// One configuration key. The same name is used as the long flag (--name)
/// and as the key of the JSON config file.
struct OptionSpec {
  std::string name;
  OptionKind kind;
  std::string help;
  std::optional<std::string> env;  // environment variable that may supply the value
};

const std::vector<OptionSpec>& run_config_options();
const OptionSpec* find_option(std::string_view name);

/// Converts flag text to the option's JSON representation. Lists are comma-separated.
nlohmann::json parse_option_text(const OptionSpec& spec, std::string_view text);

/// Everything a command can be configured with.
struct RunConfig {
  Task task = Task::TC;
  BoostRunConfig boost;
  std::vector<std::size_t> n_values{8};
  std::optional<std::filesystem::path> synonyms;
  std::optional<std::filesystem::path> misspellings;
  ScorerSpec scorer;
  std::chrono::milliseconds scorer_timeout{30000};
  EmbedMethod embedding = EmbedMethod::Deterministic;
  std::size_t max_features = 1000;
  std::size_t seeds = 5;
  std::vector<SweepMode> modes{SweepMode::BoostAug, SweepMode::MonoAug, SweepMode::RawBackend, SweepMode::None};

  /// Throws ConfigError on invalid values or missing resource files.
  void validate() const;

  /// Effective configuration in config-file form. Worker count is left out
  /// because it never changes outputs.
  nlohmann::json echo() const;
};

/// Layers are applied in order, later ones winning: the JSON config file,
/// environment variables of options that have one, then explicit flags.
/// Unknown keys and ill-typed values raise ConfigError.
struct ConfigLayers {
  nlohmann::json file = nlohmann::json::object();
  std::map<std::string, std::string> env;    // option name -> raw text
  std::map<std::string, std::string> flags;  // option name -> raw text
};

nlohmann::json load_config_file(const std::filesystem::path& path);
/// Reads the environment variables named by run_config_options().
std::map<std::string, std::string> config_from_environment();

/// Merges the layers over `defaults` and builds the typed configuration.
RunConfig resolve_run_config(const ConfigLayers& layers, const nlohmann::json& defaults = nlohmann::json::object());

/// Resources named by the configuration (empty tables when unset).
BackendResources load_resources(const RunConfig& config);

}  // namespace boostaug
