#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include <json.hpp>

namespace octplaque {

using ConfusionMatrix =
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Entry (i, j) counts truth class i predicted as class j.
ConfusionMatrix confusion_matrix(const std::vector<int>& preds,
                                 const std::vector<int>& labels,
                                 int n_classes);

/// Undefined ratios (zero denominators) surface as nullopt, never as 0.
struct BinaryMetrics {
  std::optional<double> acc, sens, spec, f1;
};

/// Standard two-class metrics with `positive_class` as the positive label.
BinaryMetrics binary_metrics(const ConfusionMatrix& confusion,
                             int positive_class = 1);

/// Per-class recall: confusion[c,c] / rowsum(c); empty rows are undefined.
std::vector<std::optional<double>> per_class_weighted_accuracy(
    const ConfusionMatrix& confusion);

/// Macro-averaged F1 over all classes. A class with no truth and no
/// predictions contributes 0.
double multiclass_f1(const ConfusionMatrix& confusion);

struct EvalReport {
  ConfusionMatrix confusion;
  long long n = 0;
  std::optional<BinaryMetrics> binary;
  std::vector<std::optional<double>> per_class_weighted_acc;
  std::optional<double> multi_f1;

  nlohmann::json to_json() const;
};

EvalReport make_report(const std::vector<int>& preds,
                       const std::vector<int>& labels, int n_classes);

/// Argmax prediction rule; ties break toward the lower class index.
int argmax_class(const float* logits, int n_classes);

}  // namespace octplaque
