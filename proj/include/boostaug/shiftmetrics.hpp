#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "boostaug/corpus.hpp"
#include "boostaug/geometry.hpp"

namespace boostaug {

struct PointCloud {
  std::vector<Point2> points;
  std::string source;  // train, test, augmented, ...
};

struct Skewness {
  double value = 0.0;
  bool degenerate = false;  // zero variance; value is reported as 0
};

/// Population skewness m3 / m2^(3/2) with m_i = mean((x - mean)^i).
/// Throws ConfigError for fewer than 3 samples.
Skewness skewness(std::span<const double> samples);

/// |skew(x)| + |skew(y)|.
double global_skewness(const PointCloud& cloud);

double overlap_rate(const PointCloud& a, const PointCloud& b);

/// Shift of cloud `a` relative to reference cloud `b`. The skewness fields
/// describe `a`.
struct ShiftReport {
  std::string a_source;
  std::string b_source;
  double overlap_rate = 0.0;
  double skew_x = 0.0;
  double skew_y = 0.0;
  double global_skewness = 0.0;
  bool skew_degenerate = false;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

ShiftReport shift_report(const PointCloud& a, const PointCloud& b);
nlohmann::json to_json(const ShiftReport& report);

// --- features and embedding ------------------------------------------------------

struct FeatureMatrix {
  Eigen::MatrixXd rows;           // one row per text
  std::vector<bool> zero_rows;    // no in-vocabulary feature; the row is all zeros
};

/// Text -> fixed-length vector. Implementations may wrap model hidden states.
class Featurizer {
 public:
  virtual ~Featurizer() = default;
  virtual std::size_t dimension() const = 0;
  /// Writes the features of `text` into `out` (size dimension()); returns
  /// false when the text has no in-vocabulary feature.
  virtual bool features(std::string_view text, Eigen::Ref<Eigen::VectorXd> out) const = 0;
};

/// L2-normalised counts of lowercased unigrams and bigrams over a vocabulary
/// fitted on a training set (most frequent first, ties alphabetical).
class LexicalFeaturizer final : public Featurizer {
 public:
  static LexicalFeaturizer fit(const Dataset& train, std::size_t max_features = 1000);

  std::size_t dimension() const override { return vocabulary_.size(); }
  bool features(std::string_view text, Eigen::Ref<Eigen::VectorXd> out) const override;
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }

 private:
  std::vector<std::string> vocabulary_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

FeatureMatrix feature_vectors(const Featurizer& featurizer, const Dataset& dataset);
FeatureMatrix feature_vectors(const Featurizer& featurizer, const std::vector<std::string>& texts);

enum class EmbedMethod { Deterministic, Tsne };

std::string_view to_string(EmbedMethod method);
EmbedMethod parse_embed_method(std::string_view name);

/// Projection of the mean-centred rows onto the two leading principal
/// directions, each direction's largest-magnitude loading made positive.
/// Throws ConfigError for fewer than 3 rows, fewer than 2 columns, or a
/// centred matrix of rank below 2.
std::vector<Point2> principal_embedding(const Eigen::MatrixXd& features);

/// The two leading principal directions as columns (dimension x 2), sign-fixed as above.
Eigen::MatrixXd principal_directions(const Eigen::MatrixXd& features);

using EmbeddingPlugin = std::function<std::vector<Point2>(const Eigen::MatrixXd& features, std::uint64_t seed)>;

/// Installs the implementation behind EmbedMethod::Tsne. A built-in exact
/// t-SNE is installed by default.
void set_tsne_plugin(EmbeddingPlugin plugin);
/// Exact O(n^2) t-SNE with perplexity min(30, (n-1)/3).
std::vector<Point2> exact_tsne(const Eigen::MatrixXd& features, std::uint64_t seed);

std::vector<Point2> embed_2d(const Eigen::MatrixXd& features, EmbedMethod method, std::uint64_t seed);
std::vector<Point2> embed_2d(const std::vector<std::vector<double>>& features, EmbedMethod method, std::uint64_t seed);

// --- end-to-end diagnosis ---------------------------------------------------------

struct DiagnoseInput {
  std::string source;
  Dataset dataset;
};

struct DiagnoseResult {
  EmbedMethod method = EmbedMethod::Deterministic;
  std::vector<PointCloud> clouds;
  std::vector<ShiftReport> pairs;
  std::size_t zero_feature_rows = 0;
};

/// Featurises every dataset with `featurizer`, embeds all rows jointly, and
/// reports each requested (cloud, reference) pair by source name.
DiagnoseResult diagnose(const std::vector<DiagnoseInput>& inputs, const Featurizer& featurizer,
                        const std::vector<std::pair<std::string, std::string>>& pairs, EmbedMethod method,
                        std::uint64_t seed);

nlohmann::json to_json(const DiagnoseResult& result);
/// x<TAB>y<TAB>source rows with a header line.
std::string points_tsv(const DiagnoseResult& result);

}  // namespace boostaug
