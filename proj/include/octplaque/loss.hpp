#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "octplaque/tensor.hpp"

namespace octplaque {

template <typename T>
struct LossResult {
  double loss = 0.0;
  MatrixX<T> dlogits;  // gradient of the batch-mean loss w.r.t. the logits
};

/// Class-weighted softmax cross-entropy, averaged over the batch:
///   L = mean_i  w[c(i)] * (-log softmax(logits_i)[c(i)])
/// Stabilized by row-max subtraction. The gradient per row is
/// w[c] * (softmax - onehot) / B.
template <typename T>
LossResult<T> weighted_cross_entropy(const MatrixX<T>& logits,
                                     const MatrixX<T>& onehot,
                                     const std::vector<double>& weights) {
  const Eigen::Index batch = logits.rows();
  const Eigen::Index classes = logits.cols();
  if (batch == 0) throw std::invalid_argument("loss: empty batch");
  if (onehot.rows() != batch || onehot.cols() != classes)
    throw std::invalid_argument("loss: label shape mismatch");
  if (static_cast<Eigen::Index>(weights.size()) != classes)
    throw std::invalid_argument("loss: weight count mismatch");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("loss: weights must be > 0");
  if (!logits.allFinite())
    throw std::invalid_argument("loss: non-finite logits");

  LossResult<T> result;
  result.dlogits.resize(batch, classes);
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch; ++i) {
    Eigen::Index label = -1;
    for (Eigen::Index c = 0; c < classes; ++c) {
      const T y = onehot(i, c);
      if (y == T(1)) {
        if (label >= 0)
          throw std::invalid_argument("loss: labels must be one-hot");
        label = c;
      } else if (y != T(0)) {
        throw std::invalid_argument("loss: labels must be one-hot");
      }
    }
    if (label < 0) throw std::invalid_argument("loss: labels must be one-hot");

    const T row_max = logits.row(i).maxCoeff();
    double sum_exp = 0.0;
    for (Eigen::Index c = 0; c < classes; ++c)
      sum_exp += std::exp(static_cast<double>(logits(i, c) - row_max));
    const double log_sum = std::log(sum_exp);
    const double logp =
        static_cast<double>(logits(i, label) - row_max) - log_sum;
    const double w = weights[static_cast<std::size_t>(label)];
    total += -w * logp;

    const double scale = w / static_cast<double>(batch);
    for (Eigen::Index c = 0; c < classes; ++c) {
      const double p =
          std::exp(static_cast<double>(logits(i, c) - row_max) - log_sum);
      const double target = c == label ? 1.0 : 0.0;
      result.dlogits(i, c) = static_cast<T>(scale * (p - target));
    }
  }
  result.loss = total / static_cast<double>(batch);
  return result;
}

/// Convenience overload on integer class ids.
template <typename T>
LossResult<T> weighted_cross_entropy(const MatrixX<T>& logits,
                                     const std::vector<int>& labels,
                                     const std::vector<double>& weights) {
  MatrixX<T> onehot = MatrixX<T>::Zero(logits.rows(), logits.cols());
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows())
    throw std::invalid_argument("loss: label count mismatch");
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= logits.cols())
      throw std::invalid_argument("loss: label out of range");
    onehot(i, c) = T(1);
  }
  return weighted_cross_entropy(logits, onehot, weights);
}

}  // namespace octplaque
