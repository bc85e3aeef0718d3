#include "ilnn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ilnn/errors.hpp"

namespace ilnn {

namespace {

void require_paired(const std::vector<std::uint32_t>& predictions,
                    const std::vector<std::uint32_t>& labels, const char* op) {
  if (predictions.size() != labels.size() || predictions.empty()) {
    throw ContractError(std::string(op) + ": equal nonempty prediction/label vectors expected");
  }
}

}  // namespace

double accuracy(const std::vector<std::uint32_t>& predictions,
                const std::vector<std::uint32_t>& labels) {
  require_paired(predictions, labels, "accuracy");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (predictions[i] == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

std::vector<std::size_t> confusion_matrix(const std::vector<std::uint32_t>& predictions,
                                          const std::vector<std::uint32_t>& labels,
                                          std::size_t class_count) {
  require_paired(predictions, labels, "confusion_matrix");
  std::vector<std::size_t> cm(class_count * class_count, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count || predictions[i] >= class_count) {
      throw ContractError("confusion_matrix: class id out of range");
    }
    ++cm[labels[i] * class_count + predictions[i]];
  }
  return cm;
}

double mcc(const std::vector<std::uint32_t>& predictions,
           const std::vector<std::uint32_t>& labels) {
  require_paired(predictions, labels, "mcc");
  std::uint32_t max_class = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    max_class = std::max({max_class, labels[i], predictions[i]});
  }
  const std::size_t k = static_cast<std::size_t>(max_class) + 1;
  std::vector<double> true_count(k, 0.0), pred_count(k, 0.0);
  double correct = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    true_count[labels[i]] += 1.0;
    pred_count[predictions[i]] += 1.0;
    if (labels[i] == predictions[i]) correct += 1.0;
  }
  const double s = static_cast<double>(labels.size());
  double cross = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    cross += pred_count[c] * true_count[c];
    pp += pred_count[c] * pred_count[c];
    tt += true_count[c] * true_count[c];
  }
  const double num = correct * s - cross;
  const double dp = s * s - pp;
  const double dt = s * s - tt;
  if (dp <= 0.0 || dt <= 0.0) return 0.0;
  return num / std::sqrt(dp * dt);
}

}  // namespace ilnn
