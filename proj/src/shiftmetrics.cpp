#include "boostaug/shiftmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>

#include <Eigen/Eigenvalues>

#include "boostaug/errors.hpp"
#include "boostaug/tokenize.hpp"

namespace boostaug {

using json = nlohmann::json;

Skewness skewness(std::span<const double> samples) {
  if (samples.size() < 3) throw ConfigError("skewness needs at least 3 samples, got " + std::to_string(samples.size()));
  if (std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples.front(); })) return {0.0, true};
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (!(m2 > 0.0)) return {0.0, true};
  return {m3 / std::pow(m2, 1.5), false};
}

namespace {

std::pair<std::vector<double>, std::vector<double>> axes(const PointCloud& cloud) {
  std::vector<double> xs, ys;
  xs.reserve(cloud.points.size());
  ys.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  return {std::move(xs), std::move(ys)};
}

}  // namespace

double global_skewness(const PointCloud& cloud) {
  const auto [xs, ys] = axes(cloud);
  return std::abs(skewness(xs).value) + std::abs(skewness(ys).value);
}

double overlap_rate(const PointCloud& a, const PointCloud& b) {
  if (a.points.empty() || b.points.empty()) throw ConfigError("overlap rate needs non-empty point clouds");
  return overlap_rate(convex_hull(a.points), convex_hull(b.points));
}

ShiftReport shift_report(const PointCloud& a, const PointCloud& b) {
  ShiftReport r;
  r.a_source = a.source;
  r.b_source = b.source;
  r.overlap_rate = overlap_rate(a, b);
  const auto [xs, ys] = axes(a);
  const auto sx = skewness(xs);
  const auto sy = skewness(ys);
  r.skew_x = sx.value;
  r.skew_y = sy.value;
  r.global_skewness = std::abs(sx.value) + std::abs(sy.value);
  r.skew_degenerate = sx.degenerate || sy.degenerate;
  r.count_a = a.points.size();
  r.count_b = b.points.size();
  return r;
}

json to_json(const ShiftReport& r) {
  return {{"a", r.a_source},
          {"b", r.b_source},
          {"overlap_rate", r.overlap_rate},
          {"skew_x", r.skew_x},
          {"skew_y", r.skew_y},
          {"global_skewness", r.global_skewness},
          {"skew_degenerate", r.skew_degenerate},
          {"count_a", r.count_a},
          {"count_b", r.count_b}};
}

// --- featurizer ---------------------------------------------------------------------

namespace {

std::vector<std::string> ngram_keys(std::string_view text) {
  auto tokens = tokenize(text);
  for (auto& t : tokens) t = to_lower_ascii(t);
  std::vector<std::string> keys = tokens;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) keys.push_back(tokens[i] + ' ' + tokens[i + 1]);
  return keys;
}

}  // namespace

LexicalFeaturizer LexicalFeaturizer::fit(const Dataset& train, std::size_t max_features) {
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : train.examples)
    for (auto& key : ngram_keys(ex.text)) ++counts[key];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_features) ranked.resize(max_features);
  if (ranked.empty()) throw ConfigError("featurizer vocabulary is empty");
  LexicalFeaturizer f;
  for (auto& [key, _] : ranked) {
    f.index_.emplace(key, f.vocabulary_.size());
    f.vocabulary_.push_back(key);
  }
  return f;
}

bool LexicalFeaturizer::features(std::string_view text, Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  for (const auto& key : ngram_keys(text))
    if (auto it = index_.find(key); it != index_.end()) out[static_cast<Eigen::Index>(it->second)] += 1.0;
  const double norm = out.norm();
  if (norm == 0.0) return false;
  out /= norm;
  return true;
}

FeatureMatrix feature_vectors(const Featurizer& featurizer, const std::vector<std::string>& texts) {
  if (featurizer.dimension() == 0) throw ConfigError("featurizer vocabulary is empty");
  FeatureMatrix m;
  m.rows.resize(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(featurizer.dimension()));
  m.zero_rows.resize(texts.size());
  Eigen::VectorXd row(featurizer.dimension());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    m.zero_rows[i] = !featurizer.features(texts[i], row);
    m.rows.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

FeatureMatrix feature_vectors(const Featurizer& featurizer, const Dataset& dataset) {
  std::vector<std::string> texts;
  texts.reserve(dataset.size());
  for (const auto& ex : dataset.examples) texts.push_back(ex.text);
  return feature_vectors(featurizer, texts);
}

// --- embedding -------------------------------------------------------------------------

std::string_view to_string(EmbedMethod method) { return method == EmbedMethod::Deterministic ? "deterministic" : "tsne"; }

EmbedMethod parse_embed_method(std::string_view name) {
  if (name == "deterministic" || name == "pca") return EmbedMethod::Deterministic;
  if (name == "tsne") return EmbedMethod::Tsne;
  throw ConfigError("unknown embedding method '" + std::string(name) + "' (expected deterministic or tsne)");
}

Eigen::MatrixXd principal_directions(const Eigen::MatrixXd& features) {
  const auto n = features.rows();
  const auto d = features.cols();
  if (n < 3) throw ConfigError("embedding needs at least 3 vectors");
  if (d < 2) throw ConfigError("embedding needs vectors of dimension at least 2");
  const Eigen::MatrixXd centered = features.rowwise() - features.colwise().mean();

  Eigen::MatrixXd directions(d, 2);
  double top = 0.0;
  double second = 0.0;
  if (d <= n) {
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw ConfigError("eigen-decomposition failed");
    directions.col(0) = eig.eigenvectors().col(d - 1);
    directions.col(1) = eig.eigenvectors().col(d - 2);
    top = eig.eigenvalues()(d - 1);
    second = eig.eigenvalues()(d - 2);
  } else {
    // Fewer rows than columns: decompose the Gram matrix instead.
    const Eigen::MatrixXd gram = (centered * centered.transpose()) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw ConfigError("eigen-decomposition failed");
    top = eig.eigenvalues()(n - 1);
    second = eig.eigenvalues()(n - 2);
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd v = centered.transpose() * eig.eigenvectors().col(n - 1 - k);
      const double norm = v.norm();
      if (norm > 0.0) v /= norm;
      directions.col(k) = v;
    }
  }
  if (!(top > 0.0) || !(second > 1e-12 * top)) throw ConfigError("feature matrix has rank below 2");

  for (int k = 0; k < 2; ++k) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < d; ++i)
      if (std::abs(directions(i, k)) > std::abs(directions(arg, k))) arg = i;
    if (directions(arg, k) < 0.0) directions.col(k) *= -1.0;
  }
  return directions;
}

std::vector<Point2> principal_embedding(const Eigen::MatrixXd& features) {
  const Eigen::MatrixXd directions = principal_directions(features);
  const Eigen::MatrixXd centered = features.rowwise() - features.colwise().mean();
  const Eigen::MatrixXd projected = centered * directions;
  std::vector<Point2> out(static_cast<std::size_t>(projected.rows()));
  for (Eigen::Index i = 0; i < projected.rows(); ++i) out[static_cast<std::size_t>(i)] = {projected(i, 0), projected(i, 1)};
  return out;
}

namespace {

std::mutex& plugin_mutex() {
  static std::mutex m;
  return m;
}

EmbeddingPlugin& plugin_slot() {
  static EmbeddingPlugin plugin = exact_tsne;
  return plugin;
}

}  // namespace

void set_tsne_plugin(EmbeddingPlugin plugin) {
  std::lock_guard lock(plugin_mutex());
  plugin_slot() = std::move(plugin);
}

std::vector<Point2> embed_2d(const Eigen::MatrixXd& features, EmbedMethod method, std::uint64_t seed) {
  if (method == EmbedMethod::Deterministic) return principal_embedding(features);
  EmbeddingPlugin plugin;
  {
    std::lock_guard lock(plugin_mutex());
    plugin = plugin_slot();
  }
  if (!plugin) throw ConfigError("no t-SNE plug-in installed");
  if (features.rows() < 3) throw ConfigError("embedding needs at least 3 vectors");
  auto points = plugin(features, seed);
  if (points.size() != static_cast<std::size_t>(features.rows()))
    throw ConfigError("t-SNE plug-in returned the wrong number of points");
  return points;
}

std::vector<Point2> embed_2d(const std::vector<std::vector<double>>& features, EmbedMethod method, std::uint64_t seed) {
  if (features.empty()) throw ConfigError("embedding needs at least 3 vectors");
  const auto d = features.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != d) throw ConfigError("feature vectors differ in dimension");
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(features[i][j])) throw ConfigError("feature vectors must be finite");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i][j];
    }
  }
  return embed_2d(m, method, seed);
}

// --- diagnosis ----------------------------------------------------------------------------

DiagnoseResult diagnose(const std::vector<DiagnoseInput>& inputs, const Featurizer& featurizer,
                        const std::vector<std::pair<std::string, std::string>>& pairs, EmbedMethod method,
                        std::uint64_t seed) {
  std::vector<std::string> texts;
  for (const auto& in : inputs) {
    if (in.dataset.size() < 3) throw ConfigError("dataset '" + in.source + "' needs at least 3 examples");
    for (const auto& ex : in.dataset.examples) texts.push_back(ex.text);
  }
  const auto features = feature_vectors(featurizer, texts);
  const auto points = embed_2d(features.rows, method, seed);

  DiagnoseResult result;
  result.method = method;
  result.zero_feature_rows = static_cast<std::size_t>(std::count(features.zero_rows.begin(), features.zero_rows.end(), true));
  std::size_t offset = 0;
  for (const auto& in : inputs) {
    PointCloud cloud;
    cloud.source = in.source;
    cloud.points.assign(points.begin() + static_cast<std::ptrdiff_t>(offset),
                        points.begin() + static_cast<std::ptrdiff_t>(offset + in.dataset.size()));
    offset += in.dataset.size();
    result.clouds.push_back(std::move(cloud));
  }
  auto find = [&](const std::string& source) -> const PointCloud& {
    for (const auto& c : result.clouds)
      if (c.source == source) return c;
    throw ConfigError("no point cloud named '" + source + "'");
  };
  for (const auto& [a, b] : pairs) result.pairs.push_back(shift_report(find(a), find(b)));
  return result;
}

json to_json(const DiagnoseResult& result) {
  json clouds = json::array();
  for (const auto& c : result.clouds) {
    const auto [xs, ys] = axes(c);
    const auto sx = skewness(xs);
    const auto sy = skewness(ys);
    clouds.push_back({{"source", c.source},
                      {"count", c.points.size()},
                      {"skew_x", sx.value},
                      {"skew_y", sy.value},
                      {"global_skewness", std::abs(sx.value) + std::abs(sy.value)},
                      {"skew_degenerate", sx.degenerate || sy.degenerate}});
  }
  json pairs = json::array();
  for (const auto& p : result.pairs) pairs.push_back(to_json(p));
  return {{"embedding", to_string(result.method)},
          {"zero_feature_rows", result.zero_feature_rows},
          {"clouds", clouds},
          {"pairs", pairs}};
}

std::string points_tsv(const DiagnoseResult& result) {
  std::string out = "x\ty\tsource\n";
  char buf[64];
  for (const auto& c : result.clouds) {
    for (const auto& p : c.points) {
      std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t", p.x, p.y);
      out += buf;
      out += c.source;
      out += '\n';
    }
  }
  return out;
}

}  // namespace boostaug
