#pragma once

#include <cmath>

#include "octplaque/geometry.hpp"
#include "octplaque/image.hpp"
#include "octplaque/rng.hpp"

namespace octplaque::testutil {

/// Band-limited random field on the polar grid: low-order harmonics in both
/// theta (periodic) and depth, values well inside [0, 1]. Smooth enough that
/// bilinear resampling round trips are meaningful.
inline PolarImage smooth_polar_phantom(Eigen::Index n_angles,
                                       Eigen::Index n_depth, RngStream& rng) {
  struct Term {
    int ka;      // angular order (periodic)
    double kd;   // radial frequency
    double amp, phase_a, phase_d;
  };
  std::vector<Term> terms;
  for (int i = 0; i < 6; ++i) {
    Term t;
    t.ka = static_cast<int>(rng.next_int(0, 3));
    t.kd = rng.next_uniform(0.3, 2.5);
    t.amp = rng.next_uniform(0.03, 0.12);
    t.phase_a = rng.next_uniform(0.0, kTwoPi);
    t.phase_d = rng.next_uniform(0.0, kTwoPi);
    terms.push_back(t);
  }
  PolarImage img;
  img.data.resize(n_angles, n_depth);
  for (Eigen::Index a = 0; a < n_angles; ++a) {
    const double theta = kTwoPi * static_cast<double>(a) /
                         static_cast<double>(n_angles);
    for (Eigen::Index d = 0; d < n_depth; ++d) {
      const double u = static_cast<double>(d) / static_cast<double>(n_depth - 1);
      double v = 0.5;
      for (const auto& t : terms)
        v += t.amp * std::cos(t.ka * theta + t.phase_a) *
             std::cos(t.kd * kTwoPi * u + t.phase_d);
      img.data(a, d) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return img;
}

inline double mean_abs_diff_in_fov(const CartesianImage& a,
                                   const CartesianImage& b) {
  double sum = 0.0;
  long long count = 0;
  for (Eigen::Index i = 0; i < a.data.rows(); ++i)
    for (Eigen::Index j = 0; j < a.data.cols(); ++j)
      if (a.fov_mask(i, j) && b.fov_mask(i, j)) {
        sum += std::abs(static_cast<double>(a.data(i, j)) - b.data(i, j));
        ++count;
      }
  return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace octplaque::testutil
