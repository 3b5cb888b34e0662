#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "octplaque/augment.hpp"
#include "octplaque/dataset.hpp"
#include "octplaque/metrics.hpp"
#include "octplaque/model.hpp"
#include "octplaque/phantom.hpp"
#include "octplaque/splits.hpp"
#include "octplaque/weight_store.hpp"

namespace octplaque {

enum class InputMode { polar, cartesian, two_path };

std::string to_string(InputMode mode);
InputMode input_mode_from_string(const std::string& s);

/// Augmentation policies for both representations; two-path batches draw
/// from both, single-path batches use the matching one.
struct PolicyPair {
  AugmentPolicy cart;
  AugmentPolicy polar;
};

/// `augment` off makes training-time policies deterministic center crops,
/// i.e. the "no data augmentation" regime.
PolicyPair make_policies(bool train_mode, bool augment, int crop);

struct TrainConfig {
  double lr0 = 1e-4;
  int batch_size = 0;  // 0 selects the default: 30 single-path, 20 two-path
  int epochs = 300;
  int plateau_patience = 10;
  double plateau_factor = 0.5;
  double min_delta = 1e-4;
  std::vector<double> class_weights;  // empty = uniform
  std::uint64_t seed = 0;

  void validate() const;
};

/// Batch-size default: 30 for single-path models, 20 for two-path models.
int effective_batch_size(const TrainConfig& cfg, bool two_path);

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double val_f1 = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  double best_val_f1 = 0.0;
  double best_val_loss = 0.0;

  void write_csv(const std::filesystem::path& path) const;
  nlohmann::json summary_json() const;
};

/// Adam training loop with per-epoch validation, plateau LR halving and
/// best-validation-F1 checkpointing. The model is left at its best epoch.
/// Aborts with a diagnostic if the loss turns non-finite.
TrainHistory train_model(Model& model, const FrameCache& train,
                         const FrameCache& val, const PolicyPair& policies,
                         InputMode mode, const TrainConfig& cfg);

struct EvalOutcome {
  EvalReport report;
  double loss = 0.0;
  std::vector<int> preds;  // aligned with the cache entries
};

/// Deterministic evaluation-mode pass (center crop, no dropout).
EvalOutcome evaluate_model(Model& model, const FrameCache& cache,
                           InputMode mode, int crop,
                           const std::vector<double>& class_weights = {});

/// One grid-search trial: learning rate, dropout keep probability, resize
/// target and crop size.
struct GridPoint {
  double lr = 1e-4;
  double dropout_keep = 0.8;
  int resize = 64;
  int crop = 56;
};

struct GridScore {
  GridPoint point;
  double mean_f1 = 0.0;
  Eigen::Index param_count = 0;
};

struct GridOutcome {
  GridPoint best;
  double best_f1 = 0.0;
  std::vector<GridScore> scores;
};

std::vector<GridPoint> expand_grid(const std::vector<double>& lrs,
                                   const std::vector<double>& keeps,
                                   const std::vector<int>& resizes,
                                   const std::vector<int>& crops);

/// Scores every grid point by mean validation F1 over k patient-level folds
/// and returns the argmax; ties break toward fewer parameters, then lower
/// learning rate.
GridOutcome grid_search(const std::vector<GridPoint>& grid,
                        const DatasetManifest& train_manifest,
                        const std::filesystem::path& root, int k,
                        const BackboneConfig& base_cfg,
                        const TrainConfig& base_train, InputMode mode,
                        bool binary, bool augment);

/// Train the backbone on the artifact-classification proxy task and return
/// its weights tagged "proxy-pretrain". The head is task-specific and gets
/// replaced on transfer.
WeightStore proxy_pretrain(const BackboneConfig& cfg,
                           const std::vector<ProxyFrame>& proxy_frames,
                           Representation rep, const TrainConfig& train_cfg,
                           int resize_size);

}  // namespace octplaque
