#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "octplaque/image.hpp"
#include "octplaque/manifest.hpp"

namespace octplaque {

/// One decoded frame with both representations pre-resized to the network
/// pipeline size (polar resized directly; cartesian transformed at the full
/// 2*depth diameter first, then resized).
struct FrameCacheEntry {
  ImageMatrix<float> polar;
  ImageMatrix<float> cart;
  int class_id = 0;
  Label raw_label = Label::no_plaque;
  std::string patient_id;
  std::string pullback_id;
  int frame_index = 0;
};

struct FrameCache {
  std::vector<FrameCacheEntry> entries;
  int resize_size = 64;
  int n_classes = 2;
  bool binary = true;
  MaskMatrix fov_mask;  // shared field-of-view mask at resize_size

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

FrameCache build_frame_cache(const DatasetManifest& manifest,
                             const std::filesystem::path& root,
                             int resize_size, bool binary);

}  // namespace octplaque
