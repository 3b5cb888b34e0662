#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "octplaque/model_config.hpp"
#include "octplaque/phantom.hpp"
#include "octplaque/tomlmini.hpp"
#include "octplaque/trainer.hpp"

namespace octplaque {

/// Configuration problems exit with code 2; runtime failures with 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Whole-run configuration, read from a TOML file and overridable by CLI
/// flags. Validated as a whole before any work starts; unknown keys are
/// rejected.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string name = "run";
  std::filesystem::path out_dir = "runs";
  bool multiclass = false;
  InputMode representation = InputMode::cartesian;
  bool deterministic = true;

  // [dataset]
  PhantomParams dataset;
  std::filesystem::path data_root = "data/desk";
  double test_fraction = 0.25;
  int val_patients = 3;
  bool paper_scale = false;

  // [augment]
  bool augment_enabled = true;
  int resize = 64;
  int crop = 56;
  double rotation_min = 0.0;
  double rotation_max = 360.0;
  int shift_min = 0;
  int shift_max = -1;  // -1 = full angular extent
  bool flip_x = true, flip_y = true, flip_theta = true;

  // [model]
  Family family = Family::residual;
  std::string model_scale = "desk";  // desk | paper
  double dropout_keep = 0.8;
  std::string freeze = "full";  // full | from_scratch | p1 | p2
  std::filesystem::path pretrained_store;
  FusionConfig fusion;

  // [train]
  TrainConfig train;
  std::optional<bool> use_class_weights;  // default: multiclass only
  int folds = 0;  // 0 = single validation split, else patient-level k-fold

  // [tables] (reproduce-tables protocol)
  int tables_epochs = 10;
  int tables_patients = 16;
  int tables_frames = 45;
  int tables_proxy_frames = 360;
  int tables_proxy_epochs = 8;

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_document(const tomlmini::Document& doc);
  tomlmini::Document to_document() const;
  void save(const std::filesystem::path& path) const;

  void validate() const;

  /// Dataset root, honoring OCTPLAQUE_DATA_ROOT for relative paths.
  std::filesystem::path resolved_data_root() const;

  BackboneConfig backbone() const;
  FreezeSpec freeze_spec() const;
  PolicyPair train_policies() const;
  PolicyPair eval_policies() const;
  bool class_weighting_enabled() const {
    return use_class_weights.value_or(multiclass);
  }
  int n_classes() const { return multiclass ? kNumClasses : 2; }
};

}  // namespace octplaque
