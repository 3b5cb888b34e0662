#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "octplaque/model.hpp"

namespace octplaque {

/// Serializable snapshot of a model's parameters. On disk this is a
/// directory holding `manifest.json` (names, shapes, source tag, model
/// metadata) plus one raw little-endian float32 blob per parameter.
struct WeightStore {
  struct Entry {
    Shape4 shape{1, 1, 1, 1};
    std::vector<float> data;
  };

  std::map<std::string, Entry> params;
  std::string source_tag = "random";  // random | proxy-pretrain | external
  nlohmann::json model_meta;

  void save(const std::filesystem::path& dir) const;
  static WeightStore load(const std::filesystem::path& dir);

  static WeightStore from_model(const Model& model, const std::string& tag);
};

/// Stack a pretrained [1,1,F1,F2] kernel onto itself along the input
/// dimension: out[:, :, 0..F1, :] = out[:, :, F1..2F1, :] = w. With both
/// fusion slots carrying identical features the linear response is exactly
/// twice the single-slice response.
WeightStore::Entry init_fusion_compression(const WeightStore::Entry& pretrained);

/// Copy stored parameters into the model.
///
/// Strict mode requires a bijection between store and model parameters with
/// exact shapes, and reports every offending path at once. Lenient mode
/// additionally resolves: two-path prefixes (`cart.`/`polar.` map onto the
/// stored single-path names), fusion-entry kernels via
/// init_fusion_compression (when the model asks for sliced init; otherwise
/// they keep their random init), head mismatches via the existing random
/// init, and 3-channel first-layer kernels by channel averaging.
void load_weights(Model& model, const WeightStore& store, bool strict);

/// Rebuild the architecture recorded in the store's metadata and load its
/// weights strictly.
Model model_from_store(const WeightStore& store);

nlohmann::json model_meta_json(const Model& model);

}  // namespace octplaque
