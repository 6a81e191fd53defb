#include "boostaug/metrics.hpp"

#include "boostaug/errors.hpp"

namespace boostaug {

ClassificationScores score_predictions(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                                       std::size_t classes) {
  if (gold.size() != predicted.size()) throw ConfigError("gold and predicted label counts differ");
  if (gold.empty()) throw ConfigError("cannot score an empty prediction set");
  std::vector<double> tp(classes, 0.0), fp(classes, 0.0), fn(classes, 0.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= classes || predicted[i] >= classes) throw ConfigError("label index out of range");
    if (gold[i] == predicted[i]) {
      ++correct;
      tp[gold[i]] += 1.0;
    } else {
      fp[predicted[i]] += 1.0;
      fn[gold[i]] += 1.0;
    }
  }
  ClassificationScores out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    const double precision = tp[c] + fp[c] > 0.0 ? tp[c] / (tp[c] + fp[c]) : 0.0;
    const double recall = tp[c] + fn[c] > 0.0 ? tp[c] / (tp[c] + fn[c]) : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    out.per_class_f1.push_back(f1);
    sum += f1;
  }
  out.macro_f1 = classes > 0 ? sum / static_cast<double>(classes) : 0.0;
  return out;
}

}  // namespace boostaug
