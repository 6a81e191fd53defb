#include "boostaug/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "boostaug/errors.hpp"
#include "boostaug/rng.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

namespace {

constexpr std::string_view kPlaceholder = "$T$";
constexpr std::uint64_t kShuffleStream = 0xf01d;
constexpr std::uint64_t kValidStream = 0x7a11d;

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

bool has_line_break(std::string_view s) {
  return s.find('\n') != std::string_view::npos || s.find('\r') != std::string_view::npos;
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::TC ? "tc" : "absc"; }

Task parse_task(std::string_view name) {
  const auto lower = to_lower_ascii(name);
  if (lower == "tc") return Task::TC;
  if (lower == "absc") return Task::ABSC;
  throw ConfigError("unknown task '" + std::string(name) + "' (expected tc or absc)");
}

LabelSet::LabelSet(std::vector<std::string> labels) {
  for (auto& l : labels) add(l);
}

std::size_t LabelSet::add(const std::string& label) {
  if (auto idx = index_of(label)) return *idx;
  labels_.push_back(label);
  return labels_.size() - 1;
}

std::optional<std::size_t> LabelSet::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  return std::nullopt;
}

void Dataset::validate() const {
  if (labels.size() < 2) throw ConfigError("dataset needs at least 2 labels");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (ex.id != i) throw ConfigError("example ids are not dense at position " + std::to_string(i));
    if (trim(ex.text).empty()) throw ConfigError("example " + std::to_string(i) + " has empty text");
    if (!labels.contains(ex.label))
      throw ConfigError("example " + std::to_string(i) + " label '" + ex.label + "' not in label set");
    if (ex.aspect.has_value() != ex.aspect_span.has_value())
      throw ConfigError("example " + std::to_string(i) + " has aspect without span or vice versa");
    if (ex.aspect) {
      const auto tokens = tokenize(ex.text);
      const auto& span = *ex.aspect_span;
      if (span.begin >= span.end || span.end > tokens.size())
        throw ConfigError("example " + std::to_string(i) + " aspect span out of range");
      const auto at = aspect_byte_offset(ex);
      if (ex.text.compare(at, ex.aspect->size(), *ex.aspect) != 0)
        throw ConfigError("example " + std::to_string(i) + " aspect does not occur at its span");
    }
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& ids) const {
  Dataset out;
  out.labels = labels;
  out.task = task;
  out.examples.reserve(ids.size());
  for (auto id : ids) {
    Example ex = examples.at(id);
    ex.id = out.examples.size();
    out.examples.push_back(std::move(ex));
  }
  return out;
}

TokenSpan aspect_token_span(std::string_view text, std::size_t offset, std::string_view aspect) {
  const auto tokens = tokenize_with_offsets(text);
  const std::size_t end = offset + aspect.size();
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto tb = tokens[i].offset;
    const auto te = tb + tokens[i].text.size();
    if (tb < offset && te > offset) break;  // token straddles the start
    if (tb >= offset && tb < end) {
      if (!first) first = i;
      last = i;
      if (te > end) {
        first.reset();
        break;
      }
    }
  }
  if (!first || tokens[*first].offset != offset ||
      tokens[last].offset + tokens[last].text.size() != end)
    throw ConfigError("aspect '" + std::string(aspect) + "' is not token-aligned in '" + std::string(text) + "'");
  return {*first, last + 1};
}

std::size_t aspect_byte_offset(const Example& example) {
  const auto tokens = tokenize_with_offsets(example.text);
  const auto begin = example.aspect_span.value().begin;
  if (begin >= tokens.size()) throw ConfigError("aspect span out of range");
  return tokens[begin].offset;
}

Dataset load_tc_dataset(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  Dataset ds;
  ds.task = Task::TC;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto& line = lines[n];
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(path.string(), n + 1, "missing tab separator");
    const std::string label(trim(std::string_view(line).substr(0, tab)));
    std::string text = line.substr(tab + 1);
    if (label.empty()) throw ParseError(path.string(), n + 1, "empty label");
    if (trim(text).empty()) throw ParseError(path.string(), n + 1, "empty text");
    ds.labels.add(label);
    ds.examples.push_back({ds.examples.size(), std::move(text), label, std::nullopt, std::nullopt});
  }
  if (ds.examples.empty()) throw ParseError(path.string(), 0, "no records");
  return ds;
}

Dataset load_absc_dataset(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ParseError(path.string(), 0, "no records");
  if (lines.size() % 3 != 0)
    throw ParseError(path.string(), lines.size(),
                     "line count " + std::to_string(lines.size()) + " is not a multiple of 3");
  Dataset ds;
  ds.task = Task::ABSC;
  for (std::size_t n = 0; n < lines.size(); n += 3) {
    const auto& sentence = lines[n];
    const std::string aspect(trim(lines[n + 1]));
    const std::string label(trim(lines[n + 2]));
    const auto at = sentence.find(kPlaceholder);
    if (at == std::string::npos) throw ParseError(path.string(), n + 1, "sentence lacks $T$ placeholder");
    if (sentence.find(kPlaceholder, at + kPlaceholder.size()) != std::string::npos)
      throw ParseError(path.string(), n + 1, "sentence has more than one $T$ placeholder");
    if (aspect.empty()) throw ParseError(path.string(), n + 2, "empty aspect");
    if (label.empty()) throw ParseError(path.string(), n + 3, "empty polarity");
    std::string text = sentence.substr(0, at) + aspect + sentence.substr(at + kPlaceholder.size());
    TokenSpan span;
    try {
      span = aspect_token_span(text, at, aspect);
    } catch (const ConfigError& e) {
      throw ParseError(path.string(), n + 1, e.what());
    }
    ds.labels.add(label);
    ds.examples.push_back({ds.examples.size(), std::move(text), label, aspect, span});
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, Task task) {
  return task == Task::TC ? load_tc_dataset(path) : load_absc_dataset(path);
}

std::string serialize_dataset(const Dataset& dataset) {
  std::ostringstream out;
  for (const auto& ex : dataset.examples) {
    if (has_line_break(ex.text) || has_line_break(ex.label))
      throw ConfigError("example " + std::to_string(ex.id) + " contains a line break");
    if (dataset.task == Task::TC) {
      if (ex.label.find('\t') != std::string::npos)
        throw ConfigError("label '" + ex.label + "' contains a tab");
      out << ex.label << '\t' << ex.text << '\n';
    } else {
      if (!ex.aspect || !ex.aspect_span)
        throw ConfigError("ABSC example " + std::to_string(ex.id) + " has no aspect");
      const auto at = aspect_byte_offset(ex);
      out << ex.text.substr(0, at) << kPlaceholder << ex.text.substr(at + ex.aspect->size()) << '\n'
          << *ex.aspect << '\n'
          << ex.label << '\n';
    }
  }
  return out.str();
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  const auto bytes = serialize_dataset(dataset);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << bytes;
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

std::vector<std::size_t> FoldPlan::fold_members(std::size_t fold) const {
  std::vector<std::size_t> ids;
  for (std::size_t id = 0; id < assignment.size(); ++id)
    if (assignment[id] == fold) ids.push_back(id);
  return ids;
}

std::vector<std::size_t> FoldPlan::members(const std::vector<std::size_t>& folds) const {
  std::vector<std::size_t> ids;
  for (std::size_t id = 0; id < assignment.size(); ++id)
    if (std::find(folds.begin(), folds.end(), assignment[id]) != folds.end()) ids.push_back(id);
  return ids;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : assignment) ++sizes[f];
  return sizes;
}

FoldPlan make_fold_plan(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  if (k <= 3) throw ConfigError("fold count k must exceed 3, got " + std::to_string(k));
  const std::size_t n = dataset.size();
  if (n < k)
    throw ConfigError("dataset has " + std::to_string(n) + " examples, fewer than k=" + std::to_string(k));

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed({seed, kShuffleStream}));
  shuffle_rng.shuffle(std::span<std::size_t>(order));
  plan.assignment.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignment[order[pos]] = pos % k;

  for (std::size_t i = 0; i < k; ++i) {
    Rng rng(derive_seed({seed, kValidStream, i}));
    std::size_t draw = rng.below(k - 1);
    FoldIteration it;
    it.boost_fold = i;
    it.valid_fold = draw >= i ? draw + 1 : draw;
    for (std::size_t f = 0; f < k; ++f)
      if (f != it.boost_fold && f != it.valid_fold) it.train_folds.push_back(f);
    plan.iterations.push_back(std::move(it));
  }
  return plan;
}

}  // namespace boostaug
