#pragma once

#include <cmath>
#include <stdexcept>

#include "octplaque/geometry.hpp"
#include "octplaque/image.hpp"
#include "octplaque/rng.hpp"

namespace octplaque {

enum class Representation { polar, cartesian };

inline const char* to_string(Representation r) {
  return r == Representation::polar ? "polar" : "cartesian";
}

/// Training-time augmentation recipe for one image representation plus the
/// deterministic evaluation-time policy (center crop only).
///
/// Rotations only apply to cartesian inputs and circular shifts only to
/// polar inputs; the other representation ignores those fields entirely.
/// `shift_range_px.hi < 0` means "full angular extent of the input".
struct AugmentPolicy {
  Representation representation = Representation::cartesian;
  bool train_mode = true;
  int crop_size = 270;
  double rotation_min_deg = 0.0;
  double rotation_max_deg = 360.0;
  int shift_min_px = 0;
  int shift_max_px = -1;
  bool flip_x = true;      // cartesian
  bool flip_y = true;      // cartesian
  bool flip_theta = true;  // polar
  std::uint64_t rng_seed = 0;

  static AugmentPolicy train(Representation rep, int crop) {
    AugmentPolicy p;
    p.representation = rep;
    p.train_mode = true;
    p.crop_size = crop;
    return p;
  }

  static AugmentPolicy eval(Representation rep, int crop) {
    AugmentPolicy p;
    p.representation = rep;
    p.train_mode = false;
    p.crop_size = crop;
    return p;
  }

  /// Degenerate ranges and no flips: training mode reduces to random crop.
  AugmentPolicy without_randomness() const {
    AugmentPolicy p = *this;
    p.rotation_min_deg = p.rotation_max_deg = 0.0;
    p.shift_min_px = p.shift_max_px = 0;
    p.flip_x = p.flip_y = p.flip_theta = false;
    return p;
  }
};

/// Rotate about the image center, counter-clockwise positive, bilinear
/// interpolation, source gaps filled with 0. Exact multiples of 360 degrees
/// return the input unchanged.
template <typename T>
CartesianImageT<T> rotate_cartesian(const CartesianImageT<T>& img,
                                    double alpha_deg) {
  if (!std::isfinite(alpha_deg))
    throw std::invalid_argument("rotation angle must be finite");
  double turn = std::fmod(alpha_deg, 360.0);
  if (turn == 0.0) return img;

  const double alpha = turn * kTwoPi / 360.0;
  const double cos_a = std::cos(alpha);
  const double sin_a = std::sin(alpha);
  const Eigen::Index n = img.size();
  const double center = (static_cast<double>(n) - 1.0) / 2.0;

  CartesianImageT<T> out;
  out.data.resize(n, n);
  out.fov_mask = img.fov_mask;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dy = center - static_cast<double>(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dx = static_cast<double>(j) - center;
      // Inverse map: rotate the output coordinate by -alpha.
      const double sx = cos_a * dx + sin_a * dy;
      const double sy = -sin_a * dx + cos_a * dy;
      const T v = detail::sample_zero_pad(img.data, center - sy, center + sx);
      out.data(i, j) = std::clamp(v, T(0), T(1));
    }
  }
  return out;
}

enum class CartesianAxis { x, y };

/// Mirror the image: axis x maps column j to W-1-j, axis y maps row i to
/// H-1-i. Bit-exact permutation.
template <typename T>
CartesianImageT<T> flip_cartesian(const CartesianImageT<T>& img,
                                  CartesianAxis axis) {
  CartesianImageT<T> out;
  if (axis == CartesianAxis::x) {
    out.data = img.data.rowwise().reverse();
    out.fov_mask = img.fov_mask.rowwise().reverse();
  } else {
    out.data = img.data.colwise().reverse();
    out.fov_mask = img.fov_mask.colwise().reverse();
  }
  return out;
}

/// Cyclic rotation of A-scans: row r moves to row (r+s) mod A. Bit-exact,
/// no interpolation; s may be any integer.
template <typename T>
PolarImageT<T> circular_shift_polar(const PolarImageT<T>& img, long long s) {
  const Eigen::Index n_angles = img.angles();
  long long shift = s % static_cast<long long>(n_angles);
  if (shift < 0) shift += n_angles;
  if (shift == 0) return img;

  PolarImageT<T> out;
  out.data.resize(img.angles(), img.depth());
  out.data.bottomRows(img.angles() - shift) = img.data.topRows(img.angles() - shift);
  out.data.topRows(shift) = img.data.bottomRows(shift);
  return out;
}

/// Reverse the theta axis: row r maps to row A-1-r. Bit-exact.
template <typename T>
PolarImageT<T> flip_polar(const PolarImageT<T>& img) {
  return PolarImageT<T>{img.data.colwise().reverse()};
}

template <typename T>
ImageMatrix<T> random_crop_matrix(const ImageMatrix<T>& in, Eigen::Index size,
                                  RngStream& rng) {
  if (size <= 0 || size > in.rows() || size > in.cols())
    throw std::invalid_argument("crop size exceeds image extent");
  const Eigen::Index top = rng.next_int(in.rows() - size + 1);
  const Eigen::Index left = rng.next_int(in.cols() - size + 1);
  return in.block(top, left, size, size);
}

template <typename T>
PolarImageT<T> random_crop(const PolarImageT<T>& img, Eigen::Index size,
                           RngStream& rng) {
  return PolarImageT<T>{random_crop_matrix(img.data, size, rng)};
}

template <typename T>
CartesianImageT<T> random_crop(const CartesianImageT<T>& img,
                               Eigen::Index size, RngStream& rng) {
  if (size <= 0 || size > img.data.rows())
    throw std::invalid_argument("crop size exceeds image extent");
  const Eigen::Index top = rng.next_int(img.data.rows() - size + 1);
  const Eigen::Index left = rng.next_int(img.data.cols() - size + 1);
  CartesianImageT<T> out;
  out.data = img.data.block(top, left, size, size);
  out.fov_mask = img.fov_mask.block(top, left, size, size);
  return out;
}

/// Training mode: flips, then rotation (cartesian), then random crop.
/// Evaluation mode: center crop only, independent of the stream.
template <typename T>
CartesianImageT<T> apply_policy(const CartesianImageT<T>& img,
                                const AugmentPolicy& policy, RngStream& rng) {
  if (policy.representation != Representation::cartesian)
    throw std::invalid_argument("cartesian image fed to a polar policy");
  if (!policy.train_mode) return center_crop(img, policy.crop_size);

  CartesianImageT<T> work = img;
  if (policy.flip_x && rng.next_bool())
    work = flip_cartesian(work, CartesianAxis::x);
  if (policy.flip_y && rng.next_bool())
    work = flip_cartesian(work, CartesianAxis::y);
  if (policy.rotation_max_deg > policy.rotation_min_deg) {
    const double alpha =
        rng.next_uniform(policy.rotation_min_deg, policy.rotation_max_deg);
    work = rotate_cartesian(work, alpha);
  } else if (policy.rotation_min_deg != 0.0) {
    work = rotate_cartesian(work, policy.rotation_min_deg);
  }
  return random_crop(work, policy.crop_size, rng);
}

template <typename T>
PolarImageT<T> apply_policy(const PolarImageT<T>& img,
                            const AugmentPolicy& policy, RngStream& rng) {
  if (policy.representation != Representation::polar)
    throw std::invalid_argument("polar image fed to a cartesian policy");
  if (!policy.train_mode) return center_crop(img, policy.crop_size);

  PolarImageT<T> work = img;
  if (policy.flip_theta && rng.next_bool()) work = flip_polar(work);
  const long long hi = policy.shift_max_px < 0
                           ? static_cast<long long>(img.angles())
                           : policy.shift_max_px;
  if (hi > policy.shift_min_px) {
    const long long s = rng.next_int(policy.shift_min_px, hi);
    work = circular_shift_polar(work, s);
  } else if (policy.shift_min_px != 0) {
    work = circular_shift_polar(work, policy.shift_min_px);
  }
  return random_crop(work, policy.crop_size, rng);
}

}  // namespace octplaque
