#include <algorithm>
#include <cmath>
#include <numbers>

#include "boostaug/errors.hpp"
#include "boostaug/rng.hpp"
#include "boostaug/shiftmetrics.hpp"

namespace boostaug {

namespace {

constexpr int kIterations = 1000;
constexpr int kExaggerationIterations = 250;
constexpr double kExaggeration = 12.0;
constexpr double kLearningRate = 200.0;
constexpr double kMinGain = 0.01;

// Conditional affinities p_{j|i} with a per-row precision found by bisection
// so the row entropy matches log(perplexity).
Eigen::MatrixXd affinities(const Eigen::MatrixXd& dist2, double perplexity) {
  const auto n = dist2.rows();
  const double target = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 64; ++step) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * dist2(i, j));
        sum += row[j];
      }
      if (!(sum > 0.0)) {
        // Precision too high for this row; back off.
        hi = beta;
        beta = (lo + hi) / 2.0;
        continue;
      }
      double weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) weighted += row[j] * dist2(i, j);
      const double entropy = std::log(sum) + beta * weighted / sum;
      row /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (lo + hi) / 2.0;
      } else {
        hi = beta;
        beta = (lo + hi) / 2.0;
      }
    }
    p.row(i) = row.transpose();
  }
  return p;
}

double gaussian(Rng& rng) {
  // Box-Muller through the portable uniform draw.
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::vector<Point2> exact_tsne(const Eigen::MatrixXd& features, std::uint64_t seed) {
  const auto n = features.rows();
  if (n < 3) throw ConfigError("embedding needs at least 3 vectors");
  const double perplexity = std::max(1.0, std::min(30.0, static_cast<double>(n - 1) / 3.0));

  Eigen::MatrixXd dist2(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) dist2(i, j) = (features.row(i) - features.row(j)).squaredNorm();

  Eigen::MatrixXd p = affinities(dist2, perplexity);
  p = (p + p.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  Rng rng(derive_seed({seed, 0x75e1}));
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < 2; ++d) y(i, d) = 1e-4 * gaussian(rng);

  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd num(n, n);
  Eigen::MatrixXd grad(n, 2);

  for (int iter = 0; iter < kIterations; ++iter) {
    const double exaggeration = iter < kExaggerationIterations ? kExaggeration : 1.0;
    const double momentum = iter < kExaggerationIterations ? 0.5 : 0.8;

    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
        num(i, j) = v;
        num(j, i) = v;
        z += 2.0 * v;
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / z, 1e-12);
        const double mult = (exaggeration * p(i, j) - q) * num(i, j);
        grad.row(i) += 4.0 * mult * (y.row(i) - y.row(j));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const bool same_sign = (grad(i, d) > 0.0) == (velocity(i, d) > 0.0);
        gains(i, d) = same_sign ? std::max(gains(i, d) * 0.8, kMinGain) : gains(i, d) + 0.2;
        velocity(i, d) = momentum * velocity(i, d) - kLearningRate * gains(i, d) * grad(i, d);
        y(i, d) += velocity(i, d);
      }
    }
    y.rowwise() -= y.colwise().mean();
  }

  std::vector<Point2> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {y(i, 0), y(i, 1)};
  return out;
}

}  // namespace boostaug
