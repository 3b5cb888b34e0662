#pragma once

#include <cmath>
#include <vector>

#include "octplaque/graph.hpp"

namespace octplaque {

/// Adam with bias correction (beta1 = 0.9, beta2 = 0.999, eps = 1e-8).
/// Frozen parameters are skipped entirely: no update, no moment drift.
template <typename T>
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  long long steps() const { return t_; }

  void step(Graph<T>& graph, const Workspace<T>& ws) {
    auto& params = graph.params();
    if (m_.size() != params.size()) {
      m_.assign(params.size(), {});
      v_.assign(params.size(), {});
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      if (!p.trainable) continue;
      const auto& g = ws.param_grads[i];
      if (m_[i].size() != p.value.size()) {
        m_[i] = ArrayX<T>::Zero(p.value.size());
        v_[i] = ArrayX<T>::Zero(p.value.size());
      }
      m_[i] = static_cast<T>(beta1_) * m_[i] + static_cast<T>(1.0 - beta1_) * g;
      v_[i] = static_cast<T>(beta2_) * v_[i] +
              static_cast<T>(1.0 - beta2_) * g * g;
      const T scale = static_cast<T>(lr_ / bc1);
      p.value -= scale * m_[i] /
                 ((v_[i] / static_cast<T>(bc2)).sqrt() + static_cast<T>(eps_));
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<ArrayX<T>> m_, v_;
};

}  // namespace octplaque
