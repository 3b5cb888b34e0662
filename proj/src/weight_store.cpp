#include "octplaque/weight_store.hpp"

#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace octplaque {

using nlohmann::json;

namespace {

std::string blob_name(const std::string& param_name) {
  std::string s = param_name;
  for (char& c : s)
    if (c == '/' || c == '\\') c = '_';
  return s + ".bin";
}

void write_blob(const std::filesystem::path& path,
                const std::vector<float>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write blob: " + path.string());
  // Little-endian float32; this codebase only targets little-endian hosts.
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
}

std::vector<float> read_blob(const std::filesystem::path& path,
                             std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read blob: " + path.string());
  std::vector<float> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
    throw std::runtime_error("blob truncated: " + path.string());
  return data;
}

}  // namespace

void WeightStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["source_tag"] = source_tag;
  manifest["model"] = model_meta;
  json plist = json::array();
  for (const auto& [name, entry] : params) {
    plist.push_back(json{{"name", name},
                         {"shape", entry.shape},
                         {"blob", blob_name(name)}});
    write_blob(dir / blob_name(name), entry.data);
  }
  manifest["params"] = plist;
  std::ofstream out(dir / "manifest.json");
  if (!out)
    throw std::runtime_error("cannot write store manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

WeightStore WeightStore::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in)
    throw std::runtime_error("weight store manifest not found in " +
                             dir.string());
  json manifest = json::parse(in);

  WeightStore store;
  store.source_tag = manifest.at("source_tag").get<std::string>();
  store.model_meta = manifest.value("model", json::object());
  for (const auto& p : manifest.at("params")) {
    Entry entry;
    const auto shape = p.at("shape").get<std::array<long long, 4>>();
    for (int i = 0; i < 4; ++i)
      entry.shape[i] = static_cast<Eigen::Index>(shape[i]);
    entry.data = read_blob(dir / p.at("blob").get<std::string>(),
                           static_cast<std::size_t>(shape_size(entry.shape)));
    store.params.emplace(p.at("name").get<std::string>(), std::move(entry));
  }
  return store;
}

WeightStore WeightStore::from_model(const Model& model,
                                    const std::string& tag) {
  WeightStore store;
  store.source_tag = tag;
  store.model_meta = model_meta_json(model);
  for (const auto& p : model.graph.params()) {
    Entry entry;
    entry.shape = p.shape;
    entry.data.assign(p.value.data(), p.value.data() + p.value.size());
    store.params.emplace(p.name, std::move(entry));
  }
  return store;
}

WeightStore::Entry init_fusion_compression(
    const WeightStore::Entry& pretrained) {
  if (pretrained.shape[0] != 1 || pretrained.shape[1] != 1)
    throw std::invalid_argument("fusion init expects a 1x1 kernel");
  const Eigen::Index f1 = pretrained.shape[2];
  const Eigen::Index f2 = pretrained.shape[3];
  if (static_cast<Eigen::Index>(pretrained.data.size()) != f1 * f2)
    throw std::invalid_argument("fusion init: data/shape mismatch");

  WeightStore::Entry out;
  out.shape = {1, 1, 2 * f1, f2};
  out.data.resize(static_cast<std::size_t>(2 * f1 * f2));
  std::copy(pretrained.data.begin(), pretrained.data.end(), out.data.begin());
  std::copy(pretrained.data.begin(), pretrained.data.end(),
            out.data.begin() + static_cast<std::ptrdiff_t>(f1 * f2));
  return out;
}

namespace {

const WeightStore::Entry* lookup(const WeightStore& store,
                                 const std::string& name,
                                 std::string* matched) {
  auto it = store.params.find(name);
  if (it != store.params.end()) {
    if (matched) *matched = name;
    return &it->second;
  }
  for (const char* prefix : {"cart.", "polar."}) {
    if (name.rfind(prefix, 0) == 0) {
      const std::string stripped = name.substr(std::strlen(prefix));
      it = store.params.find(stripped);
      if (it != store.params.end()) {
        if (matched) *matched = stripped;
        return &it->second;
      }
    }
  }
  return nullptr;
}

bool is_fusion_weight(const Model& model, const std::string& name) {
  for (const auto& n : model.fusion_weight_names)
    if (n == name) return true;
  return false;
}

}  // namespace

void load_weights(Model& model, const WeightStore& store, bool strict) {
  std::vector<std::string> problems;
  std::set<std::string> consumed;

  for (auto& p : model.graph.params()) {
    std::string matched;
    const WeightStore::Entry* entry = lookup(store, p.name, &matched);

    if (strict) {
      if (!entry || matched != p.name) {
        problems.push_back("missing parameter: " + p.name);
        continue;
      }
      if (entry->shape != p.shape) {
        problems.push_back("shape mismatch: " + p.name);
        continue;
      }
      consumed.insert(matched);
      std::copy(entry->data.begin(), entry->data.end(), p.value.data());
      continue;
    }

    if (entry && entry->shape == p.shape) {
      std::copy(entry->data.begin(), entry->data.end(), p.value.data());
      continue;
    }
    if (entry && is_fusion_weight(model, p.name) && entry->shape[0] == 1 &&
        entry->shape[1] == 1 && 2 * entry->shape[2] == p.shape[2] &&
        entry->shape[3] == p.shape[3]) {
      if (model.fusion.sliced_init) {
        const auto sliced = init_fusion_compression(*entry);
        std::copy(sliced.data.begin(), sliced.data.end(), p.value.data());
      }
      // Without sliced init this kernel keeps its random initialization;
      // everything else still comes from the store.
      continue;
    }
    if (p.group == 5) continue;  // replaced head stays randomly initialized
    if (entry && entry->shape[0] == p.shape[0] &&
        entry->shape[1] == p.shape[1] && entry->shape[2] == 3 &&
        p.shape[2] == 1 && entry->shape[3] == p.shape[3]) {
      // External natural-image checkpoints carry RGB first layers; average
      // the channel taps for grayscale input.
      const Eigen::Index taps = p.shape[0] * p.shape[1];
      const Eigen::Index cout = p.shape[3];
      for (Eigen::Index t = 0; t < taps; ++t)
        for (Eigen::Index co = 0; co < cout; ++co) {
          float sum = 0.0f;
          for (Eigen::Index ci = 0; ci < 3; ++ci)
            sum += entry->data[static_cast<std::size_t>((t * 3 + ci) * cout + co)];
          p.value[t * cout + co] = sum / 3.0f;
        }
      continue;
    }
    problems.push_back(entry ? "shape mismatch: " + p.name
                             : "missing parameter: " + p.name);
  }

  if (strict) {
    for (const auto& [name, entry] : store.params)
      if (!consumed.count(name)) problems.push_back("unused store entry: " + name);
  }
  if (!problems.empty()) {
    std::string msg = "load_weights failed:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::runtime_error(msg);
  }
  model.source_tag = store.source_tag;
}

nlohmann::json model_meta_json(const Model& model) {
  json j;
  j["backbone"] = model.cfg.to_json();
  j["n_classes"] = model.n_classes;
  j["two_path"] = model.two_path;
  if (model.two_path) {
    j["concat_point"] = model.fusion.concat_point;
    j["sliced_init"] = model.fusion.sliced_init;
  }
  return j;
}

Model model_from_store(const WeightStore& store) {
  const json& meta = store.model_meta;
  if (!meta.contains("backbone"))
    throw std::runtime_error("weight store has no model metadata");
  const BackboneConfig cfg = BackboneConfig::from_json(meta.at("backbone"));
  const int n_classes = meta.at("n_classes").get<int>();
  Model model;
  if (meta.value("two_path", false)) {
    FusionConfig fusion;
    fusion.concat_point = meta.at("concat_point").get<int>();
    fusion.sliced_init = meta.value("sliced_init", true);
    model = build_two_path<float>(cfg, fusion, n_classes);
  } else {
    model = build_single_path<float>(cfg, n_classes);
  }
  load_weights(model, store, /*strict=*/true);
  return model;
}

}  // namespace octplaque
