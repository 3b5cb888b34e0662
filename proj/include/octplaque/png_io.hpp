#pragma once

#include <filesystem>

#include "octplaque/image.hpp"

namespace octplaque {

/// Write a [0,1] intensity grid as 16-bit grayscale PNG; values map linearly
/// to [0, 65535] and are clamped before quantization.
void save_png16(const std::filesystem::path& path,
                const ImageMatrix<float>& img);

/// Read a 16-bit (or 8-bit) grayscale PNG back to [0,1] intensities.
ImageMatrix<float> load_png16(const std::filesystem::path& path);

/// Write an 8-bit RGB PNG from three same-shaped [0,1] channel grids.
void save_png_rgb8(const std::filesystem::path& path,
                   const ImageMatrix<float>& r, const ImageMatrix<float>& g,
                   const ImageMatrix<float>& b);

}  // namespace octplaque
