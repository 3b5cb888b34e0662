#include "octplaque/run_config.hpp"

#include <cstdlib>
#include <set>

namespace octplaque {

namespace {

using tomlmini::Document;
using tomlmini::Value;

const std::set<std::string> kKnownKeys = {
    "seed", "name", "out_dir", "mode", "representation", "deterministic",
    "dataset.root", "dataset.patients", "dataset.frames_per_pullback",
    "dataset.polar_angles", "dataset.polar_depth", "dataset.class_mix",
    "dataset.artifact_rate", "dataset.label_noise_rate", "dataset.seed",
    "dataset.test_fraction", "dataset.val_patients", "dataset.paper_scale",
    "augment.enabled", "augment.resize", "augment.crop",
    "augment.rotation_range", "augment.shift_range", "augment.flips",
    "model.family", "model.scale", "model.dropout_keep", "model.freeze",
    "model.pretrained", "model.concat_point", "model.sliced_init",
    "train.lr", "train.batch_size", "train.epochs", "train.plateau_patience",
    "train.plateau_factor", "train.min_delta", "train.use_class_weights",
    "train.folds", "train.seed",
    "tables.epochs", "tables.patients", "tables.frames_per_pullback",
    "tables.proxy_frames", "tables.proxy_epochs",
};

const Value* get(const Document& doc, const std::string& key) {
  auto it = doc.find(key);
  return it == doc.end() ? nullptr : &it->second;
}

template <typename F>
void with(const Document& doc, const std::string& key, F&& fn) {
  if (const Value* v = get(doc, key)) {
    try {
      fn(*v);
    } catch (const std::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  try {
    return from_document(tomlmini::parse_file(path.string()));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

RunConfig RunConfig::from_document(const tomlmini::Document& doc) {
  for (const auto& [key, value] : doc)
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config key: " + key);

  RunConfig cfg;
  with(doc, "seed", [&](const Value& v) {
    cfg.seed = static_cast<std::uint64_t>(v.as_int());
  });
  with(doc, "name", [&](const Value& v) { cfg.name = v.as_string(); });
  with(doc, "out_dir", [&](const Value& v) { cfg.out_dir = v.as_string(); });
  with(doc, "mode", [&](const Value& v) {
    const std::string& s = v.as_string();
    if (s == "binary") cfg.multiclass = false;
    else if (s == "multiclass") cfg.multiclass = true;
    else throw ConfigError("mode must be binary or multiclass");
  });
  with(doc, "representation", [&](const Value& v) {
    cfg.representation = input_mode_from_string(v.as_string());
  });
  with(doc, "deterministic",
       [&](const Value& v) { cfg.deterministic = v.as_bool(); });

  with(doc, "dataset.root", [&](const Value& v) { cfg.data_root = v.as_string(); });
  with(doc, "dataset.patients",
       [&](const Value& v) { cfg.dataset.n_patients = static_cast<int>(v.as_int()); });
  with(doc, "dataset.frames_per_pullback", [&](const Value& v) {
    cfg.dataset.frames_per_pullback = static_cast<int>(v.as_int());
  });
  with(doc, "dataset.polar_angles", [&](const Value& v) {
    cfg.dataset.polar_angles = static_cast<int>(v.as_int());
  });
  with(doc, "dataset.polar_depth", [&](const Value& v) {
    cfg.dataset.polar_depth = static_cast<int>(v.as_int());
  });
  with(doc, "dataset.class_mix", [&](const Value& v) {
    const auto& arr = v.as_array();
    if (arr.size() != 3) throw ConfigError("class_mix needs 3 entries");
    for (int i = 0; i < 3; ++i)
      cfg.dataset.class_mix[static_cast<std::size_t>(i)] =
          arr[static_cast<std::size_t>(i)].as_number();
  });
  with(doc, "dataset.artifact_rate",
       [&](const Value& v) { cfg.dataset.artifact_rate = v.as_number(); });
  with(doc, "dataset.label_noise_rate",
       [&](const Value& v) { cfg.dataset.label_noise_rate = v.as_number(); });
  with(doc, "dataset.seed", [&](const Value& v) {
    cfg.dataset.seed = static_cast<std::uint64_t>(v.as_int());
  });
  with(doc, "dataset.test_fraction",
       [&](const Value& v) { cfg.test_fraction = v.as_number(); });
  with(doc, "dataset.val_patients",
       [&](const Value& v) { cfg.val_patients = static_cast<int>(v.as_int()); });
  with(doc, "dataset.paper_scale",
       [&](const Value& v) { cfg.paper_scale = v.as_bool(); });

  with(doc, "augment.enabled",
       [&](const Value& v) { cfg.augment_enabled = v.as_bool(); });
  with(doc, "augment.resize",
       [&](const Value& v) { cfg.resize = static_cast<int>(v.as_int()); });
  with(doc, "augment.crop",
       [&](const Value& v) { cfg.crop = static_cast<int>(v.as_int()); });
  with(doc, "augment.rotation_range", [&](const Value& v) {
    const auto& arr = v.as_array();
    if (arr.size() != 2) throw ConfigError("rotation_range needs 2 entries");
    cfg.rotation_min = arr[0].as_number();
    cfg.rotation_max = arr[1].as_number();
  });
  with(doc, "augment.shift_range", [&](const Value& v) {
    const auto& arr = v.as_array();
    if (arr.size() != 2) throw ConfigError("shift_range needs 2 entries");
    cfg.shift_min = static_cast<int>(arr[0].as_int());
    cfg.shift_max = static_cast<int>(arr[1].as_int());
  });
  with(doc, "augment.flips", [&](const Value& v) {
    cfg.flip_x = cfg.flip_y = cfg.flip_theta = false;
    for (const auto& item : v.as_array()) {
      const std::string& axis = item.as_string();
      if (axis == "x") cfg.flip_x = true;
      else if (axis == "y") cfg.flip_y = true;
      else if (axis == "theta") cfg.flip_theta = true;
      else throw ConfigError("unknown flip axis: " + axis);
    }
  });

  with(doc, "model.family",
       [&](const Value& v) { cfg.family = family_from_string(v.as_string()); });
  with(doc, "model.scale", [&](const Value& v) {
    const std::string& s = v.as_string();
    if (s != "desk" && s != "paper")
      throw ConfigError("model scale must be desk or paper");
    cfg.model_scale = s;
  });
  with(doc, "model.dropout_keep",
       [&](const Value& v) { cfg.dropout_keep = v.as_number(); });
  with(doc, "model.freeze", [&](const Value& v) { cfg.freeze = v.as_string(); });
  with(doc, "model.pretrained",
       [&](const Value& v) { cfg.pretrained_store = v.as_string(); });
  with(doc, "model.concat_point", [&](const Value& v) {
    cfg.fusion.concat_point = static_cast<int>(v.as_int());
  });
  with(doc, "model.sliced_init",
       [&](const Value& v) { cfg.fusion.sliced_init = v.as_bool(); });

  with(doc, "train.lr", [&](const Value& v) { cfg.train.lr0 = v.as_number(); });
  with(doc, "train.batch_size", [&](const Value& v) {
    cfg.train.batch_size = static_cast<int>(v.as_int());
  });
  with(doc, "train.epochs",
       [&](const Value& v) { cfg.train.epochs = static_cast<int>(v.as_int()); });
  with(doc, "train.plateau_patience", [&](const Value& v) {
    cfg.train.plateau_patience = static_cast<int>(v.as_int());
  });
  with(doc, "train.plateau_factor",
       [&](const Value& v) { cfg.train.plateau_factor = v.as_number(); });
  with(doc, "train.min_delta",
       [&](const Value& v) { cfg.train.min_delta = v.as_number(); });
  with(doc, "train.use_class_weights",
       [&](const Value& v) { cfg.use_class_weights = v.as_bool(); });
  with(doc, "train.folds",
       [&](const Value& v) { cfg.folds = static_cast<int>(v.as_int()); });
  with(doc, "train.seed", [&](const Value& v) {
    cfg.train.seed = static_cast<std::uint64_t>(v.as_int());
  });

  with(doc, "tables.epochs",
       [&](const Value& v) { cfg.tables_epochs = static_cast<int>(v.as_int()); });
  with(doc, "tables.patients", [&](const Value& v) {
    cfg.tables_patients = static_cast<int>(v.as_int());
  });
  with(doc, "tables.frames_per_pullback", [&](const Value& v) {
    cfg.tables_frames = static_cast<int>(v.as_int());
  });
  with(doc, "tables.proxy_frames", [&](const Value& v) {
    cfg.tables_proxy_frames = static_cast<int>(v.as_int());
  });
  with(doc, "tables.proxy_epochs", [&](const Value& v) {
    cfg.tables_proxy_epochs = static_cast<int>(v.as_int());
  });

  cfg.validate();
  return cfg;
}

tomlmini::Document RunConfig::to_document() const {
  Document doc;
  doc["seed"] = Value{static_cast<long long>(seed)};
  doc["name"] = Value{name};
  doc["out_dir"] = Value{out_dir.string()};
  doc["mode"] = Value{std::string(multiclass ? "multiclass" : "binary")};
  doc["representation"] = Value{to_string(representation)};
  doc["deterministic"] = Value{deterministic};

  doc["dataset.root"] = Value{data_root.string()};
  doc["dataset.patients"] = Value{static_cast<long long>(dataset.n_patients)};
  doc["dataset.frames_per_pullback"] =
      Value{static_cast<long long>(dataset.frames_per_pullback)};
  doc["dataset.polar_angles"] =
      Value{static_cast<long long>(dataset.polar_angles)};
  doc["dataset.polar_depth"] =
      Value{static_cast<long long>(dataset.polar_depth)};
  doc["dataset.class_mix"] =
      Value{std::vector<Value>{Value{dataset.class_mix[0]},
                               Value{dataset.class_mix[1]},
                               Value{dataset.class_mix[2]}}};
  doc["dataset.artifact_rate"] = Value{dataset.artifact_rate};
  doc["dataset.label_noise_rate"] = Value{dataset.label_noise_rate};
  doc["dataset.seed"] = Value{static_cast<long long>(dataset.seed)};
  doc["dataset.test_fraction"] = Value{test_fraction};
  doc["dataset.val_patients"] = Value{static_cast<long long>(val_patients)};
  doc["dataset.paper_scale"] = Value{paper_scale};

  doc["augment.enabled"] = Value{augment_enabled};
  doc["augment.resize"] = Value{static_cast<long long>(resize)};
  doc["augment.crop"] = Value{static_cast<long long>(crop)};
  doc["augment.rotation_range"] =
      Value{std::vector<Value>{Value{rotation_min}, Value{rotation_max}}};
  doc["augment.shift_range"] =
      Value{std::vector<Value>{Value{static_cast<long long>(shift_min)},
                               Value{static_cast<long long>(shift_max)}}};
  std::vector<Value> flips;
  if (flip_x) flips.push_back(Value{std::string("x")});
  if (flip_y) flips.push_back(Value{std::string("y")});
  if (flip_theta) flips.push_back(Value{std::string("theta")});
  doc["augment.flips"] = Value{flips};

  doc["model.family"] = Value{to_string(family)};
  doc["model.scale"] = Value{model_scale};
  doc["model.dropout_keep"] = Value{dropout_keep};
  doc["model.freeze"] = Value{freeze};
  doc["model.pretrained"] = Value{pretrained_store.string()};
  doc["model.concat_point"] =
      Value{static_cast<long long>(fusion.concat_point)};
  doc["model.sliced_init"] = Value{fusion.sliced_init};

  doc["train.lr"] = Value{train.lr0};
  doc["train.batch_size"] = Value{static_cast<long long>(train.batch_size)};
  doc["train.epochs"] = Value{static_cast<long long>(train.epochs)};
  doc["train.plateau_patience"] =
      Value{static_cast<long long>(train.plateau_patience)};
  doc["train.plateau_factor"] = Value{train.plateau_factor};
  doc["train.min_delta"] = Value{train.min_delta};
  if (use_class_weights)
    doc["train.use_class_weights"] = Value{*use_class_weights};
  doc["train.folds"] = Value{static_cast<long long>(folds)};
  doc["train.seed"] = Value{static_cast<long long>(train.seed)};

  doc["tables.epochs"] = Value{static_cast<long long>(tables_epochs)};
  doc["tables.patients"] = Value{static_cast<long long>(tables_patients)};
  doc["tables.frames_per_pullback"] =
      Value{static_cast<long long>(tables_frames)};
  doc["tables.proxy_frames"] =
      Value{static_cast<long long>(tables_proxy_frames)};
  doc["tables.proxy_epochs"] =
      Value{static_cast<long long>(tables_proxy_epochs)};
  return doc;
}

void RunConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  tomlmini::write_file(to_document(), path.string());
}

void RunConfig::validate() const {
  try {
    dataset.validate();
    train.validate();
    fusion.validate();
    backbone().validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (crop > resize) throw ConfigError("augment.crop exceeds augment.resize");
  if (resize < 16) throw ConfigError("augment.resize must be >= 16");
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw ConfigError("test_fraction must be in [0, 1)");
  if (val_patients < 1 && folds == 0)
    throw ConfigError("need at least one validation patient");
  if (folds < 0 || folds == 1)
    throw ConfigError("train.folds must be 0 or >= 2");
  if (freeze != "full" && freeze != "from_scratch" && freeze != "p1" &&
      freeze != "p2")
    throw ConfigError("model.freeze must be full, from_scratch, p1 or p2");
  if ((freeze == "p1" || freeze == "p2") && pretrained_store.empty())
    throw ConfigError("freeze points p1/p2 require model.pretrained");
  if (rotation_max < rotation_min)
    throw ConfigError("rotation_range must be ordered");
}

std::filesystem::path RunConfig::resolved_data_root() const {
  if (data_root.is_absolute()) return data_root;
  if (const char* env = std::getenv("OCTPLAQUE_DATA_ROOT"))
    return std::filesystem::path(env) / data_root;
  return data_root;
}

BackboneConfig RunConfig::backbone() const {
  BackboneConfig cfg = model_scale == "paper" ? BackboneConfig::paper(family)
                                              : BackboneConfig::desk(family);
  cfg.dropout_keep = dropout_keep;
  cfg.input_size = crop;
  return cfg;
}

FreezeSpec RunConfig::freeze_spec() const {
  if (freeze == "from_scratch") return FreezeSpec::from_scratch();
  if (freeze == "p1") return FreezeSpec::at(1);
  if (freeze == "p2") return FreezeSpec::at(2);
  return FreezeSpec::full();
}

PolicyPair RunConfig::train_policies() const {
  PolicyPair p = make_policies(true, augment_enabled, crop);
  for (AugmentPolicy* policy : {&p.cart, &p.polar}) {
    policy->rotation_min_deg = rotation_min;
    policy->rotation_max_deg = rotation_max;
    policy->shift_min_px = shift_min;
    policy->shift_max_px = shift_max;
    policy->flip_x = flip_x;
    policy->flip_y = flip_y;
    policy->flip_theta = flip_theta;
    policy->rng_seed = seed;
  }
  return p;
}

PolicyPair RunConfig::eval_policies() const {
  return make_policies(false, false, crop);
}

}  // namespace octplaque
