#pragma once

#include <cstddef>
#include <vector>

namespace boostaug {

struct ClassificationScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
};

/// Accuracy and per-class F1 from label indices in [0, classes). A class
/// whose precision or recall is 0/0 gets F1 = 0; macro-F1 is the unweighted mean.
ClassificationScores score_predictions(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& predicted,
                                       std::size_t classes);

}  // namespace boostaug
