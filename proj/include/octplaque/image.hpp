#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace octplaque {

template <typename T>
using ImageMatrix =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MaskMatrix =
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// B-scan in polar form: rows index the probe angle theta, columns index
/// depth along an A-scan. Intensities live in [0, 1].
template <typename T>
struct PolarImageT {
  ImageMatrix<T> data;

  Eigen::Index angles() const { return data.rows(); }
  Eigen::Index depth() const { return data.cols(); }
};

/// Cross-sectional view resampled onto a square grid. Pixels outside the
/// circular field of view are 0 and flagged false in `fov_mask`.
template <typename T>
struct CartesianImageT {
  ImageMatrix<T> data;
  MaskMatrix fov_mask;

  Eigen::Index size() const { return data.rows(); }
};

using PolarImage = PolarImageT<float>;
using CartesianImage = CartesianImageT<float>;

template <typename T>
bool all_finite(const ImageMatrix<T>& m) {
  return m.allFinite();
}

/// Mask of pixels within distance size/2 of the grid center (size-1)/2.
inline MaskMatrix circular_fov_mask(Eigen::Index size) {
  MaskMatrix mask(size, size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  const double r2 = (static_cast<double>(size) / 2.0) *
                    (static_cast<double>(size) / 2.0);
  for (Eigen::Index i = 0; i < size; ++i) {
    const double dy = static_cast<double>(i) - c;
    for (Eigen::Index j = 0; j < size; ++j) {
      const double dx = static_cast<double>(j) - c;
      mask(i, j) = dx * dx + dy * dy <= r2;
    }
  }
  return mask;
}

template <typename T>
void validate_polar(const PolarImageT<T>& img) {
  if (img.angles() < 4 || img.depth() < 4)
    throw std::invalid_argument("polar image must be at least 4x4");
  if (!all_finite(img.data))
    throw std::invalid_argument("polar image contains non-finite values");
}

template <typename T>
void validate_cartesian(const CartesianImageT<T>& img) {
  if (img.data.rows() != img.data.cols())
    throw std::invalid_argument("cartesian image must be square");
  if (img.data.rows() < 4)
    throw std::invalid_argument("cartesian image must be at least 4x4");
  if (!all_finite(img.data))
    throw std::invalid_argument("cartesian image contains non-finite values");
}

}  // namespace octplaque
