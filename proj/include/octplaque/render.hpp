#pragma once

#include <filesystem>
#include <vector>

#include "octplaque/image.hpp"

namespace octplaque {

/// One frame of a rendered pullback strip, ordered by frame_index.
struct PullbackStripFrame {
  ImageMatrix<float> cart;  // square cartesian view
  int predicted = 0;
  int truth = 0;
  int frame_index = 0;
};

/// Three-band figure written as RGB PNG: a longitudinal montage built from
/// the central column of every cartesian frame, a prediction strip and a
/// ground-truth strip. One pixel column per frame. Class colors: green =
/// no plaque, red = plaque (lipid/fibrous in the multi-class case), amber =
/// calcified.
void render_pullback(const std::vector<PullbackStripFrame>& frames,
                     const std::filesystem::path& out_path);

}  // namespace octplaque
