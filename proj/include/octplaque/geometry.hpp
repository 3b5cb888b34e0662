#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "octplaque/image.hpp"

namespace octplaque {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

namespace detail {

/// Bilinear sample with row/column clamping at the borders.
template <typename T>
T sample_clamped(const ImageMatrix<T>& m, double row, double col) {
  const double maxr = static_cast<double>(m.rows() - 1);
  const double maxc = static_cast<double>(m.cols() - 1);
  row = std::clamp(row, 0.0, maxr);
  col = std::clamp(col, 0.0, maxc);
  const Eigen::Index r0 = static_cast<Eigen::Index>(row);
  const Eigen::Index c0 = static_cast<Eigen::Index>(col);
  const Eigen::Index r1 = std::min(r0 + 1, m.rows() - 1);
  const Eigen::Index c1 = std::min(c0 + 1, m.cols() - 1);
  const double fr = row - static_cast<double>(r0);
  const double fc = col - static_cast<double>(c0);
  const double v = (1.0 - fr) * ((1.0 - fc) * m(r0, c0) + fc * m(r0, c1)) +
                   fr * ((1.0 - fc) * m(r1, c0) + fc * m(r1, c1));
  return static_cast<T>(v);
}

/// Bilinear sample treating everything outside the grid as 0.
template <typename T>
T sample_zero_pad(const ImageMatrix<T>& m, double row, double col) {
  const Eigen::Index r0 = static_cast<Eigen::Index>(std::floor(row));
  const Eigen::Index c0 = static_cast<Eigen::Index>(std::floor(col));
  const double fr = row - static_cast<double>(r0);
  const double fc = col - static_cast<double>(c0);
  double v = 0.0;
  const auto pick = [&](Eigen::Index r, Eigen::Index c) -> double {
    if (r < 0 || c < 0 || r >= m.rows() || c >= m.cols()) return 0.0;
    return static_cast<double>(m(r, c));
  };
  v += (1.0 - fr) * (1.0 - fc) * pick(r0, c0);
  v += (1.0 - fr) * fc * pick(r0, c0 + 1);
  v += fr * (1.0 - fc) * pick(r0 + 1, c0);
  v += fr * fc * pick(r0 + 1, c0 + 1);
  return static_cast<T>(v);
}

/// Bilinear sample of a polar grid: periodic along rows (theta), clamped
/// along columns (depth).
template <typename T>
T sample_polar(const ImageMatrix<T>& m, double a, double d) {
  const double n_angles = static_cast<double>(m.rows());
  a = std::fmod(a, n_angles);
  if (a < 0) a += n_angles;
  d = std::clamp(d, 0.0, static_cast<double>(m.cols() - 1));
  const Eigen::Index a0 = static_cast<Eigen::Index>(a);
  const Eigen::Index a1 = (a0 + 1) % m.rows();
  const Eigen::Index d0 = static_cast<Eigen::Index>(d);
  const Eigen::Index d1 = std::min(d0 + 1, m.cols() - 1);
  const double fa = a - static_cast<double>(a0);
  const double fd = d - static_cast<double>(d0);
  const double v = (1.0 - fa) * ((1.0 - fd) * m(a0, d0) + fd * m(a0, d1)) +
                   fa * ((1.0 - fd) * m(a1, d0) + fd * m(a1, d1));
  return static_cast<T>(v);
}

}  // namespace detail

/// Resample a polar B-scan onto a square cartesian grid of side `out_size`.
///
/// Depth 0 maps to the continuous grid center (out_size-1)/2 and depth D-1 to
/// radius out_size/2; the theta=0 A-scan points along +x, theta increasing
/// counter-clockwise (y up). Pixels beyond the field-of-view circle are 0.
template <typename T>
CartesianImageT<T> polar_to_cartesian(const PolarImageT<T>& polar,
                                      Eigen::Index out_size) {
  validate_polar(polar);
  if (out_size < 4) throw std::invalid_argument("out_size must be >= 4");

  const Eigen::Index n_angles = polar.angles();
  const Eigen::Index n_depth = polar.depth();
  const double center = (static_cast<double>(out_size) - 1.0) / 2.0;
  const double fov_radius = static_cast<double>(out_size) / 2.0;
  const double depth_scale = static_cast<double>(n_depth - 1) / fov_radius;
  const double angle_scale = static_cast<double>(n_angles) / kTwoPi;

  CartesianImageT<T> out;
  out.data.setZero(out_size, out_size);
  out.fov_mask = circular_fov_mask(out_size);
  for (Eigen::Index i = 0; i < out_size; ++i) {
    const double dy = center - static_cast<double>(i);
    for (Eigen::Index j = 0; j < out_size; ++j) {
      if (!out.fov_mask(i, j)) continue;
      const double dx = static_cast<double>(j) - center;
      const double r = std::sqrt(dx * dx + dy * dy);
      double theta = std::atan2(dy, dx);
      if (theta < 0) theta += kTwoPi;
      const T v = detail::sample_polar(polar.data, theta * angle_scale,
                                       r * depth_scale);
      out.data(i, j) = std::clamp(v, T(0), T(1));
    }
  }
  return out;
}

/// Inverse resampler: sample a cartesian image along rays from its center,
/// with the same angle convention as polar_to_cartesian.
template <typename T>
PolarImageT<T> cartesian_to_polar(const CartesianImageT<T>& cart,
                                  Eigen::Index n_angles,
                                  Eigen::Index n_depth) {
  validate_cartesian(cart);
  if (n_angles < 4 || n_depth < 4)
    throw std::invalid_argument("polar output must be at least 4x4");

  const double center = (static_cast<double>(cart.size()) - 1.0) / 2.0;
  const double fov_radius = static_cast<double>(cart.size()) / 2.0;

  PolarImageT<T> out;
  out.data.resize(n_angles, n_depth);
  for (Eigen::Index a = 0; a < n_angles; ++a) {
    const double theta =
        kTwoPi * static_cast<double>(a) / static_cast<double>(n_angles);
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    for (Eigen::Index d = 0; d < n_depth; ++d) {
      const double r = fov_radius * static_cast<double>(d) /
                       static_cast<double>(n_depth - 1);
      const double col = center + r * cos_t;
      const double row = center - r * sin_t;
      const T v = detail::sample_clamped(cart.data, row, col);
      out.data(a, d) = std::clamp(v, T(0), T(1));
    }
  }
  return out;
}

/// Bilinear resize with half-pixel center alignment. Same-shape calls copy
/// the input bit for bit.
template <typename T>
ImageMatrix<T> resize_bilinear(const ImageMatrix<T>& in, Eigen::Index h,
                               Eigen::Index w) {
  if (h < 4 || w < 4) throw std::invalid_argument("resize target must be >= 4");
  if (h == in.rows() && w == in.cols()) return in;

  ImageMatrix<T> out(h, w);
  const double sr = static_cast<double>(in.rows()) / static_cast<double>(h);
  const double sc = static_cast<double>(in.cols()) / static_cast<double>(w);
  for (Eigen::Index i = 0; i < h; ++i) {
    const double src_r = (static_cast<double>(i) + 0.5) * sr - 0.5;
    for (Eigen::Index j = 0; j < w; ++j) {
      const double src_c = (static_cast<double>(j) + 0.5) * sc - 0.5;
      const T v = detail::sample_clamped(in, src_r, src_c);
      out(i, j) = std::clamp(v, T(0), T(1));
    }
  }
  return out;
}

template <typename T>
PolarImageT<T> resize(const PolarImageT<T>& img, Eigen::Index h,
                      Eigen::Index w) {
  return PolarImageT<T>{resize_bilinear(img.data, h, w)};
}

template <typename T>
CartesianImageT<T> resize(const CartesianImageT<T>& img, Eigen::Index h,
                          Eigen::Index w) {
  if (h != w) throw std::invalid_argument("cartesian resize must stay square");
  CartesianImageT<T> out;
  out.data = resize_bilinear(img.data, h, w);
  out.fov_mask = circular_fov_mask(h);
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = 0; j < w; ++j)
      if (!out.fov_mask(i, j)) out.data(i, j) = T(0);
  return out;
}

/// Centered size x size window; odd margins leave the extra row/column on
/// the bottom/right side.
template <typename T>
ImageMatrix<T> center_crop_matrix(const ImageMatrix<T>& in, Eigen::Index size) {
  if (size <= 0 || size > in.rows() || size > in.cols())
    throw std::invalid_argument("crop size exceeds image extent");
  const Eigen::Index top = (in.rows() - size) / 2;
  const Eigen::Index left = (in.cols() - size) / 2;
  return in.block(top, left, size, size);
}

template <typename T>
PolarImageT<T> center_crop(const PolarImageT<T>& img, Eigen::Index size) {
  return PolarImageT<T>{center_crop_matrix(img.data, size)};
}

template <typename T>
CartesianImageT<T> center_crop(const CartesianImageT<T>& img,
                               Eigen::Index size) {
  CartesianImageT<T> out;
  out.data = center_crop_matrix(img.data, size);
  const Eigen::Index top = (img.data.rows() - size) / 2;
  const Eigen::Index left = (img.data.cols() - size) / 2;
  out.fov_mask = img.fov_mask.block(top, left, size, size);
  return out;
}

}  // namespace octplaque
