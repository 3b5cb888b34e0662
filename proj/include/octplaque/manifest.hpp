#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace octplaque {

enum class Label { no_plaque = 0, lipid_fibrous = 1, calcified = 2 };

inline constexpr int kNumClasses = 3;

std::string to_string(Label label);
Label label_from_string(const std::string& s);

/// Binary view: any plaque type collapses to class 1.
inline int binary_class(Label label) { return label == Label::no_plaque ? 0 : 1; }

enum class SplitTag { train, val, test, unassigned };

std::string to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& s);

/// One labeled B-scan. `polar_path` is relative to the dataset root.
struct LabeledFrame {
  std::string patient_id;
  std::string pullback_id;
  int frame_index = 0;
  std::string polar_path;
  Label label = Label::no_plaque;

  bool operator==(const LabeledFrame&) const = default;
};

struct DatasetManifest {
  std::vector<LabeledFrame> frames;
  SplitTag split_tag = SplitTag::unassigned;
  nlohmann::json provenance;  // generator parameters + seed

  bool operator==(const DatasetManifest& o) const {
    return frames == o.frames && split_tag == o.split_tag &&
           provenance == o.provenance;
  }

  std::vector<std::string> patient_ids() const;  // unique, first-appearance order
  std::vector<long long> class_counts() const;   // indexed by Label
};

/// Checks the (patient, pullback, frame) uniqueness and the contiguity of
/// frame indices within each pullback; throws on violation.
void validate_manifest(const DatasetManifest& manifest);

/// JSON-lines file, one frame per line; split tag and provenance go to a
/// `<path>.meta.json` sidecar so the frame stream stays homogeneous.
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

/// Loads and validates; parse failures report the offending line number.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Keep only frames whose patient is in `patients`, preserving order.
DatasetManifest filter_patients(const DatasetManifest& manifest,
                                const std::vector<std::string>& patients,
                                SplitTag tag);

}  // namespace octplaque
