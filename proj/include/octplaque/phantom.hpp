#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "octplaque/image.hpp"
#include "octplaque/manifest.hpp"
#include "octplaque/rng.hpp"

namespace octplaque {

/// Knobs of the synthetic pullback generator. Appearance constants
/// (intensities, decay lengths, sector geometry) are fixed in phantom.cpp.
struct PhantomParams {
  int n_patients = 24;
  int frames_per_pullback = 60;
  int polar_angles = 192;  // A
  int polar_depth = 224;   // D
  std::array<double, 3> class_mix{0.5, 0.4, 0.1};  // no_plaque, lipid, calcified
  double artifact_rate = 0.25;
  double label_noise_rate = 0.0;
  std::uint64_t seed = 0;

  /// 24 x 60 = 1440 frames, trains in minutes on one core.
  static PhantomParams desk();

  /// 49 patients x 82 frames at the acquisition resolution (496 x 960).
  static PhantomParams paper_scale();

  void validate() const;

  nlohmann::json to_json() const;
  static PhantomParams from_json(const nlohmann::json& j);
};

/// Render one pullback for `patient_id`, writing 16-bit PNGs under
/// `<root>/<patient_id>/pb00/<frame>.png`. Deterministic in `rng`.
std::vector<LabeledFrame> generate_pullback(const PhantomParams& params,
                                            const std::string& patient_id,
                                            const std::filesystem::path& root,
                                            RngStream rng);

/// Full dataset: one pullback per patient, each driven by an independent
/// stream split from `params.seed`. Saves `<root>/manifest.jsonl` and returns
/// the manifest with provenance filled in.
DatasetManifest generate_dataset(const PhantomParams& params,
                                 const std::filesystem::path& root);

/// Frames for the self-supervised pretraining task: artifact-type
/// classification. Classes: 0 = clean, 1 = guidewire shadow, 2 = residual
/// blood haze, balanced thirds.
struct ProxyFrame {
  PolarImage polar;
  int artifact_class = 0;
};

inline constexpr int kProxyClasses = 3;

std::vector<ProxyFrame> generate_proxy_frames(const PhantomParams& params,
                                              int n_frames, RngStream rng);

}  // namespace octplaque
