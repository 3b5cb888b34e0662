#include "octplaque/dataset.hpp"

#include <stdexcept>

#include "octplaque/geometry.hpp"
#include "octplaque/png_io.hpp"

namespace octplaque {

FrameCache build_frame_cache(const DatasetManifest& manifest,
                             const std::filesystem::path& root,
                             int resize_size, bool binary) {
  if (resize_size < 8)
    throw std::invalid_argument("frame cache resize too small");

  FrameCache cache;
  cache.resize_size = resize_size;
  cache.binary = binary;
  cache.n_classes = binary ? 2 : kNumClasses;
  cache.fov_mask = circular_fov_mask(resize_size);
  cache.entries.reserve(manifest.frames.size());

  for (const auto& f : manifest.frames) {
    PolarImage polar{load_png16(root / f.polar_path)};
    const Eigen::Index diameter = 2 * polar.depth();
    CartesianImage cart = polar_to_cartesian(polar, diameter);

    FrameCacheEntry entry;
    entry.polar = resize(polar, resize_size, resize_size).data;
    entry.cart = resize(cart, resize_size, resize_size).data;
    entry.raw_label = f.label;
    entry.class_id =
        binary ? binary_class(f.label) : static_cast<int>(f.label);
    entry.patient_id = f.patient_id;
    entry.pullback_id = f.pullback_id;
    entry.frame_index = f.frame_index;
    cache.entries.push_back(std::move(entry));
  }
  return cache;
}

}  // namespace octplaque
