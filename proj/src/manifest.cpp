#include "octplaque/manifest.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace octplaque {

using nlohmann::json;

std::string to_string(Label label) {
  switch (label) {
    case Label::no_plaque: return "no_plaque";
    case Label::lipid_fibrous: return "lipid_fibrous";
    case Label::calcified: return "calcified";
  }
  throw std::logic_error("bad label value");
}

Label label_from_string(const std::string& s) {
  if (s == "no_plaque") return Label::no_plaque;
  if (s == "lipid_fibrous") return Label::lipid_fibrous;
  if (s == "calcified") return Label::calcified;
  throw std::invalid_argument("unknown label: " + s);
}

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::test: return "test";
    case SplitTag::unassigned: return "unassigned";
  }
  throw std::logic_error("bad split tag");
}

SplitTag split_tag_from_string(const std::string& s) {
  if (s == "train") return SplitTag::train;
  if (s == "val") return SplitTag::val;
  if (s == "test") return SplitTag::test;
  if (s == "unassigned") return SplitTag::unassigned;
  throw std::invalid_argument("unknown split tag: " + s);
}

std::vector<std::string> DatasetManifest::patient_ids() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& f : frames)
    if (seen.insert(f.patient_id).second) out.push_back(f.patient_id);
  return out;
}

std::vector<long long> DatasetManifest::class_counts() const {
  std::vector<long long> counts(kNumClasses, 0);
  for (const auto& f : frames) ++counts[static_cast<int>(f.label)];
  return counts;
}

void validate_manifest(const DatasetManifest& manifest) {
  std::set<std::tuple<std::string, std::string, int>> keys;
  std::unordered_map<std::string, std::set<int>> per_pullback;
  for (const auto& f : manifest.frames) {
    if (f.frame_index < 0)
      throw std::invalid_argument("negative frame index in manifest");
    auto key = std::make_tuple(f.patient_id, f.pullback_id, f.frame_index);
    if (!keys.insert(key).second)
      throw std::invalid_argument("duplicate frame key: " + f.patient_id + "/" +
                                  f.pullback_id + "/" +
                                  std::to_string(f.frame_index));
    per_pullback[f.patient_id + "/" + f.pullback_id].insert(f.frame_index);
  }
  for (const auto& [pb, indices] : per_pullback) {
    int expected = 0;
    for (int idx : indices) {
      if (idx != expected)
        throw std::invalid_argument("frame indices not contiguous from 0 in " +
                                    pb);
      ++expected;
    }
  }
}

namespace {

json frame_to_json(const LabeledFrame& f) {
  return json{{"patient_id", f.patient_id},
              {"pullback_id", f.pullback_id},
              {"frame_index", f.frame_index},
              {"polar_path", f.polar_path},
              {"label", to_string(f.label)}};
}

LabeledFrame frame_from_json(const json& j) {
  LabeledFrame f;
  f.patient_id = j.at("patient_id").get<std::string>();
  f.pullback_id = j.at("pullback_id").get<std::string>();
  f.frame_index = j.at("frame_index").get<int>();
  f.polar_path = j.at("polar_path").get<std::string>();
  f.label = label_from_string(j.at("label").get<std::string>());
  return f;
}

std::filesystem::path meta_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

}  // namespace

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
  validate_manifest(manifest);
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  for (const auto& f : manifest.frames) out << frame_to_json(f).dump() << '\n';
  out.close();

  json meta{{"split_tag", to_string(manifest.split_tag)},
            {"provenance", manifest.provenance}};
  std::ofstream mout(meta_path(path));
  if (!mout)
    throw std::runtime_error("cannot write manifest meta: " + path.string());
  mout << meta.dump(2) << '\n';
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest not found: " + path.string());

  DatasetManifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      manifest.frames.push_back(frame_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("manifest " + path.string() + " line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }

  const auto meta = meta_path(path);
  if (std::filesystem::exists(meta)) {
    std::ifstream min(meta);
    json j = json::parse(min);
    manifest.split_tag = split_tag_from_string(j.at("split_tag"));
    manifest.provenance = j.value("provenance", json::object());
  }
  validate_manifest(manifest);
  return manifest;
}

DatasetManifest filter_patients(const DatasetManifest& manifest,
                                const std::vector<std::string>& patients,
                                SplitTag tag) {
  std::unordered_set<std::string> keep(patients.begin(), patients.end());
  DatasetManifest out;
  out.split_tag = tag;
  out.provenance = manifest.provenance;
  for (const auto& f : manifest.frames)
    if (keep.count(f.patient_id)) out.frames.push_back(f);
  return out;
}

}  // namespace octplaque
