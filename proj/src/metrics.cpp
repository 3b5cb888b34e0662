#include "octplaque/metrics.hpp"

#include <stdexcept>

namespace octplaque {

using nlohmann::json;

ConfusionMatrix confusion_matrix(const std::vector<int>& preds,
                                 const std::vector<int>& labels,
                                 int n_classes) {
  if (preds.size() != labels.size())
    throw std::invalid_argument("confusion: prediction/label count mismatch");
  if (n_classes < 2) throw std::invalid_argument("confusion: need >= 2 classes");
  ConfusionMatrix m = ConfusionMatrix::Zero(n_classes, n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int t = labels[i];
    const int p = preds[i];
    if (t < 0 || t >= n_classes || p < 0 || p >= n_classes)
      throw std::invalid_argument("confusion: class id out of range");
    ++m(t, p);
  }
  return m;
}

namespace {

std::optional<double> ratio(long long num, long long den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

BinaryMetrics binary_metrics(const ConfusionMatrix& confusion,
                             int positive_class) {
  if (confusion.rows() != 2 || confusion.cols() != 2)
    throw std::invalid_argument("binary metrics need a 2x2 confusion matrix");
  if (positive_class != 0 && positive_class != 1)
    throw std::invalid_argument("positive class must be 0 or 1");
  const int pos = positive_class;
  const int neg = 1 - positive_class;
  const long long tp = confusion(pos, pos);
  const long long tn = confusion(neg, neg);
  const long long fp = confusion(neg, pos);
  const long long fn = confusion(pos, neg);

  BinaryMetrics m;
  m.acc = ratio(tp + tn, tp + tn + fp + fn);
  m.sens = ratio(tp, tp + fn);
  m.spec = ratio(tn, tn + fp);
  m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  return m;
}

std::vector<std::optional<double>> per_class_weighted_accuracy(
    const ConfusionMatrix& confusion) {
  std::vector<std::optional<double>> out;
  out.reserve(static_cast<std::size_t>(confusion.rows()));
  for (Eigen::Index c = 0; c < confusion.rows(); ++c)
    out.push_back(ratio(confusion(c, c), confusion.row(c).sum()));
  return out;
}

double multiclass_f1(const ConfusionMatrix& confusion) {
  const Eigen::Index m = confusion.rows();
  double total = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) {
    const long long tp = confusion(c, c);
    const long long fn = confusion.row(c).sum() - tp;
    const long long fp = confusion.col(c).sum() - tp;
    const long long den = 2 * tp + fp + fn;
    total += den == 0 ? 0.0
                      : 2.0 * static_cast<double>(tp) /
                            static_cast<double>(den);
  }
  return total / static_cast<double>(m);
}

EvalReport make_report(const std::vector<int>& preds,
                       const std::vector<int>& labels, int n_classes) {
  EvalReport report;
  report.confusion = confusion_matrix(preds, labels, n_classes);
  report.n = static_cast<long long>(preds.size());
  if (n_classes == 2) report.binary = binary_metrics(report.confusion, 1);
  report.per_class_weighted_acc = per_class_weighted_accuracy(report.confusion);
  report.multi_f1 = multiclass_f1(report.confusion);
  return report;
}

int argmax_class(const float* logits, int n_classes) {
  int best = 0;
  for (int c = 1; c < n_classes; ++c)
    if (logits[c] > logits[best]) best = c;
  return best;
}

namespace {

json opt_to_json(const std::optional<double>& v) {
  if (!v) return json{{"defined", false}};
  return json{{"defined", true}, {"value", *v}};
}

}  // namespace

json EvalReport::to_json() const {
  json j;
  j["n"] = n;
  std::vector<std::vector<long long>> rows;
  for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
    std::vector<long long> row;
    for (Eigen::Index k = 0; k < confusion.cols(); ++k)
      row.push_back(confusion(i, k));
    rows.push_back(std::move(row));
  }
  j["confusion"] = rows;
  if (binary) {
    j["binary"] = json{{"acc", opt_to_json(binary->acc)},
                       {"sens", opt_to_json(binary->sens)},
                       {"spec", opt_to_json(binary->spec)},
                       {"f1", opt_to_json(binary->f1)}};
  }
  json wa = json::array();
  for (const auto& v : per_class_weighted_acc) wa.push_back(opt_to_json(v));
  j["per_class_weighted_acc"] = wa;
  if (multi_f1) j["multi_f1"] = *multi_f1;
  return j;
}

}  // namespace octplaque
