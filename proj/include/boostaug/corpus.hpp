#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace boostaug {

enum class Task { TC, ABSC };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

/// Half-open token index range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const TokenSpan&) const = default;
};

struct Example {
  std::size_t id = 0;
  std::string text;
  std::string label;
  std::optional<std::string> aspect;
  std::optional<TokenSpan> aspect_span;

  bool operator==(const Example&) const = default;
};

/// Ordered set of label tokens; order is first appearance in the source file.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> labels);

  /// Appends if absent; returns the label's index.
  std::size_t add(const std::string& label);
  std::optional<std::size_t> index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return index_of(label).has_value(); }

  const std::string& operator[](std::size_t i) const { return labels_[i]; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<std::string>& tokens() const noexcept { return labels_; }

  bool operator==(const LabelSet&) const = default;

 private:
  std::vector<std::string> labels_;
};

struct Dataset {
  std::vector<Example> examples;
  LabelSet labels;
  Task task = Task::TC;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }

  /// Throws ConfigError if ids are not dense 0..N-1, a label is outside the
  /// LabelSet, a text is blank, or an aspect does not sit at its span.
  void validate() const;

  /// Examples with the given ids, re-numbered densely in the given order.
  /// The LabelSet and task are inherited unchanged.
  Dataset subset(const std::vector<std::size_t>& ids) const;

  bool operator==(const Dataset&) const = default;
};

/// Token span of the aspect occurrence starting at byte `offset` of `text`.
/// Throws ConfigError if the aspect is not token-aligned there.
TokenSpan aspect_token_span(std::string_view text, std::size_t offset, std::string_view aspect);

/// Byte offset of the aspect within `text`, located through `span`.
std::size_t aspect_byte_offset(const Example& example);

/// Reads `label<TAB>text` lines. Labels are collected in first-appearance order.
Dataset load_tc_dataset(const std::filesystem::path& path);

/// Reads 3-line records: sentence containing `$T$`, aspect term, polarity.
Dataset load_absc_dataset(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, Task task);

/// Writes in the loader format matching `dataset.task`.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Same bytes write_dataset() would produce.
std::string serialize_dataset(const Dataset& dataset);

/// Roles of the k folds during one cross-boosting iteration.
struct FoldIteration {
  std::size_t boost_fold = 0;
  std::size_t valid_fold = 0;
  std::vector<std::size_t> train_folds;  // ascending, size k-2

  bool operator==(const FoldIteration&) const = default;
};

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> assignment;  // per example id
  std::vector<FoldIteration> iterations;

  /// Example ids of a fold in ascending id order.
  std::vector<std::size_t> fold_members(std::size_t fold) const;
  /// Example ids of all the given folds, ascending.
  std::vector<std::size_t> members(const std::vector<std::size_t>& folds) const;
  std::vector<std::size_t> fold_sizes() const;

  bool operator==(const FoldPlan&) const = default;
};

/// Seeded shuffle then round-robin assignment; each iteration i boosts fold i
/// and draws its validation fold from the remaining k-1.
FoldPlan make_fold_plan(const Dataset& dataset, std::size_t k, std::uint64_t seed);

}  // namespace boostaug
