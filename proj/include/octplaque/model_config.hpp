#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace octplaque {

enum class Family { residual, dense };

inline std::string to_string(Family f) {
  return f == Family::residual ? "residual" : "dense";
}
inline Family family_from_string(const std::string& s) {
  if (s == "residual") return Family::residual;
  if (s == "dense") return Family::dense;
  throw std::invalid_argument("unknown model family: " + s);
}

/// Backbone hyperparameters for both families. `desk` presets train in
/// minutes on one CPU core; `paper` presets match the reference block
/// layouts (ResNet50-class / DenseNet121-class).
struct BackboneConfig {
  Family family = Family::residual;
  std::array<int, 4> stage_blocks{2, 2, 2, 2};
  int base_width = 16;      // residual: stem width and first bottleneck width
  int growth_rate = 32;     // dense: k
  double compression = 0.5; // dense: c
  double dropout_keep = 0.8;
  int input_size = 270;

  static BackboneConfig desk(Family f) {
    BackboneConfig cfg;
    cfg.family = f;
    if (f == Family::residual) {
      cfg.stage_blocks = {2, 2, 2, 2};
      cfg.base_width = 16;
    } else {
      cfg.stage_blocks = {4, 4, 4, 4};
      cfg.growth_rate = 12;
    }
    cfg.input_size = 56;
    return cfg;
  }

  static BackboneConfig paper(Family f) {
    BackboneConfig cfg;
    cfg.family = f;
    if (f == Family::residual) {
      cfg.stage_blocks = {3, 4, 6, 3};
      cfg.base_width = 64;
    } else {
      cfg.stage_blocks = {6, 12, 24, 16};
      cfg.growth_rate = 32;
    }
    cfg.input_size = 270;
    return cfg;
  }

  void validate() const {
    for (int b : stage_blocks)
      if (b < 1) throw std::invalid_argument("stage block counts must be >= 1");
    if (base_width < 1) throw std::invalid_argument("base width must be >= 1");
    if (growth_rate < 1) throw std::invalid_argument("growth rate must be >= 1");
    if (compression <= 0.0 || compression > 1.0)
      throw std::invalid_argument("compression must be in (0, 1]");
    if (dropout_keep <= 0.0 || dropout_keep > 1.0)
      throw std::invalid_argument("dropout keep must be in (0, 1]");
    if (input_size < 8) throw std::invalid_argument("input size too small");
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"family", to_string(family)},
                          {"stage_blocks", stage_blocks},
                          {"base_width", base_width},
                          {"growth_rate", growth_rate},
                          {"compression", compression},
                          {"dropout_keep", dropout_keep},
                          {"input_size", input_size}};
  }

  static BackboneConfig from_json(const nlohmann::json& j) {
    BackboneConfig cfg;
    cfg.family = family_from_string(j.at("family").get<std::string>());
    cfg.stage_blocks = j.at("stage_blocks").get<std::array<int, 4>>();
    cfg.base_width = j.at("base_width").get<int>();
    cfg.growth_rate = j.at("growth_rate").get<int>();
    cfg.compression = j.at("compression").get<double>();
    cfg.dropout_keep = j.at("dropout_keep").get<double>();
    cfg.input_size = j.at("input_size").get<int>();
    cfg.validate();
    return cfg;
  }
};

/// Transfer-learning regime. `freeze_at` keeps the stem and every stage up
/// to (and including) the retraining point fixed; the rest fine-tunes.
struct FreezeSpec {
  enum class Mode { from_scratch, full_finetune, freeze_at };
  Mode mode = Mode::full_finetune;
  int retrain_point = 1;  // valid values: 1, 2

  static FreezeSpec from_scratch() { return {Mode::from_scratch, 1}; }
  static FreezeSpec full() { return {Mode::full_finetune, 1}; }
  static FreezeSpec at(int p) {
    if (p != 1 && p != 2)
      throw std::invalid_argument("retraining point must be 1 or 2");
    return {Mode::freeze_at, p};
  }
};

/// Two-path fusion: concatenate features after stage/block `concat_point`
/// of each path. With `sliced_init` the first convolution consuming the
/// doubled feature maps receives the pretrained single-path kernel stacked
/// along its input dimension.
struct FusionConfig {
  int concat_point = 3;  // valid values: 2, 3, 4
  bool sliced_init = true;

  void validate() const {
    if (concat_point < 2 || concat_point > 4)
      throw std::invalid_argument("concat point must be 2, 3 or 4");
  }
};

}  // namespace octplaque
