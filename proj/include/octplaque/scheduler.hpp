#pragma once

#include <limits>
#include <vector>

namespace octplaque {

/// Reduce-on-plateau: halves the learning rate when the best validation
/// loss has not improved by more than `min_delta` for `patience` consecutive
/// epochs; the counter resets after every drop.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr0, int patience, double factor = 0.5,
                   double min_delta = 1e-4)
      : lr_(lr0), patience_(patience), factor_(factor), min_delta_(min_delta) {}

  double learning_rate() const { return lr_; }

  /// Feed one epoch's validation loss; returns the learning rate to use
  /// from the next epoch on.
  double observe(double val_loss) {
    if (!has_best_ || val_loss < best_ - min_delta_) {
      best_ = val_loss;
      has_best_ = true;
      stale_ = 0;
    } else if (++stale_ >= patience_) {
      lr_ *= factor_;
      stale_ = 0;
    }
    return lr_;
  }

 private:
  double lr_;
  int patience_;
  double factor_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  bool has_best_ = false;
  int stale_ = 0;
};

/// Replay a validation-loss trace and return the learning rate after each
/// epoch.
inline std::vector<double> plateau_schedule_trace(
    const std::vector<double>& val_losses, double lr0, int patience,
    double factor = 0.5, double min_delta = 1e-4) {
  PlateauScheduler sched(lr0, patience, factor, min_delta);
  std::vector<double> out;
  out.reserve(val_losses.size());
  for (double loss : val_losses) out.push_back(sched.observe(loss));
  return out;
}

}  // namespace octplaque
