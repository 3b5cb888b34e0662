#pragma once

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "octplaque/rng.hpp"
#include "octplaque/tensor.hpp"

namespace octplaque {

struct ConvGeom {
  int kernel = 1;
  int stride = 1;
  int pad = 0;

  Eigen::Index out_dim(Eigen::Index in) const {
    return (in + 2 * pad - kernel) / stride + 1;
  }
};

// Convolution weights are stored flat in [kh][kw][cin][cout] order, so the
// matrix view [kh*kw*cin, cout] multiplies an im2col patch matrix directly.

/// Gather conv patches: cols is [N*Ho*Wo, k*k*Cin], one row per output pixel,
/// columns ordered (ky, kx, cin). Out-of-bounds taps are zero.
template <typename T>
void im2col(const Tensor<T>& x, const ConvGeom& g, MatrixX<T>& cols) {
  const Eigen::Index ho = g.out_dim(x.h);
  const Eigen::Index wo = g.out_dim(x.w);
  const Eigen::Index patch = static_cast<Eigen::Index>(g.kernel) * g.kernel * x.c;
  cols.resize(x.n * ho * wo, patch);

  for (Eigen::Index b = 0; b < x.n; ++b) {
    for (Eigen::Index oy = 0; oy < ho; ++oy) {
      const Eigen::Index iy0 = oy * g.stride - g.pad;
      for (Eigen::Index ox = 0; ox < wo; ++ox) {
        const Eigen::Index ix0 = ox * g.stride - g.pad;
        T* row = cols.data() + ((b * ho + oy) * wo + ox) * patch;
        for (int ky = 0; ky < g.kernel; ++ky) {
          const Eigen::Index iy = iy0 + ky;
          for (int kx = 0; kx < g.kernel; ++kx) {
            const Eigen::Index ix = ix0 + kx;
            T* dst = row + (static_cast<Eigen::Index>(ky) * g.kernel + kx) * x.c;
            if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) {
              std::fill(dst, dst + x.c, T(0));
            } else {
              const T* src = x.data() + ((b * x.h + iy) * x.w + ix) * x.c;
              std::memcpy(dst, src, sizeof(T) * static_cast<std::size_t>(x.c));
            }
          }
        }
      }
    }
  }
}

/// Scatter-add the patch-gradient matrix back onto the input gradient.
template <typename T>
void col2im_add(const MatrixX<T>& dcols, const ConvGeom& g, Tensor<T>& dx) {
  const Eigen::Index ho = g.out_dim(dx.h);
  const Eigen::Index wo = g.out_dim(dx.w);
  const Eigen::Index patch = static_cast<Eigen::Index>(g.kernel) * g.kernel * dx.c;

  for (Eigen::Index b = 0; b < dx.n; ++b) {
    for (Eigen::Index oy = 0; oy < ho; ++oy) {
      const Eigen::Index iy0 = oy * g.stride - g.pad;
      for (Eigen::Index ox = 0; ox < wo; ++ox) {
        const Eigen::Index ix0 = ox * g.stride - g.pad;
        const T* row = dcols.data() + ((b * ho + oy) * wo + ox) * patch;
        for (int ky = 0; ky < g.kernel; ++ky) {
          const Eigen::Index iy = iy0 + ky;
          if (iy < 0 || iy >= dx.h) continue;
          for (int kx = 0; kx < g.kernel; ++kx) {
            const Eigen::Index ix = ix0 + kx;
            if (ix < 0 || ix >= dx.w) continue;
            const T* src = row + (static_cast<Eigen::Index>(ky) * g.kernel + kx) * dx.c;
            T* dst = dx.data() + ((b * dx.h + iy) * dx.w + ix) * dx.c;
            for (Eigen::Index ch = 0; ch < dx.c; ++ch) dst[ch] += src[ch];
          }
        }
      }
    }
  }
}

template <typename T>
void relu_forward(const Tensor<T>& x, Tensor<T>& y) {
  y.resize_like(x);
  y.v = x.v.max(T(0));
}

template <typename T>
void relu_backward_add(const Tensor<T>& y, const Tensor<T>& dy, Tensor<T>& dx) {
  dx.v += dy.v * (y.v > T(0)).template cast<T>();
}

/// Max pooling; `argmax` records the flat input index feeding each output
/// element (first maximum in scan order on ties).
template <typename T>
void maxpool_forward(const Tensor<T>& x, const ConvGeom& g, Tensor<T>& y,
                     ArrayX<Eigen::Index>& argmax) {
  const Eigen::Index ho = g.out_dim(x.h);
  const Eigen::Index wo = g.out_dim(x.w);
  y.resize(x.n, ho, wo, x.c);
  if (argmax.size() != y.size()) argmax.resize(y.size());

  Eigen::Index out_idx = 0;
  for (Eigen::Index b = 0; b < x.n; ++b) {
    for (Eigen::Index oy = 0; oy < ho; ++oy) {
      for (Eigen::Index ox = 0; ox < wo; ++ox) {
        for (Eigen::Index ch = 0; ch < x.c; ++ch, ++out_idx) {
          T best = std::numeric_limits<T>::lowest();
          Eigen::Index best_idx = -1;
          for (int ky = 0; ky < g.kernel; ++ky) {
            const Eigen::Index iy = oy * g.stride - g.pad + ky;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < g.kernel; ++kx) {
              const Eigen::Index ix = ox * g.stride - g.pad + kx;
              if (ix < 0 || ix >= x.w) continue;
              const Eigen::Index idx = ((b * x.h + iy) * x.w + ix) * x.c + ch;
              if (x.v[idx] > best) {
                best = x.v[idx];
                best_idx = idx;
              }
            }
          }
          y.v[out_idx] = best_idx >= 0 ? best : T(0);
          argmax[out_idx] = best_idx;
        }
      }
    }
  }
}

template <typename T>
void maxpool_backward_add(const ArrayX<Eigen::Index>& argmax,
                          const Tensor<T>& dy, Tensor<T>& dx) {
  for (Eigen::Index i = 0; i < dy.size(); ++i)
    if (argmax[i] >= 0) dx.v[argmax[i]] += dy.v[i];
}

/// 2x2 stride-2 average pooling (window always fully inside; odd trailing
/// rows/columns are dropped).
template <typename T>
void avgpool2_forward(const Tensor<T>& x, Tensor<T>& y) {
  const Eigen::Index ho = x.h / 2;
  const Eigen::Index wo = x.w / 2;
  if (ho < 1 || wo < 1) throw std::invalid_argument("avgpool on <2px input");
  y.resize(x.n, ho, wo, x.c);
  for (Eigen::Index b = 0; b < x.n; ++b)
    for (Eigen::Index oy = 0; oy < ho; ++oy)
      for (Eigen::Index ox = 0; ox < wo; ++ox)
        for (Eigen::Index ch = 0; ch < x.c; ++ch)
          y.at(b, oy, ox, ch) =
              (x.at(b, 2 * oy, 2 * ox, ch) + x.at(b, 2 * oy, 2 * ox + 1, ch) +
               x.at(b, 2 * oy + 1, 2 * ox, ch) +
               x.at(b, 2 * oy + 1, 2 * ox + 1, ch)) *
              T(0.25);
}

template <typename T>
void avgpool2_backward_add(const Tensor<T>& dy, Tensor<T>& dx) {
  for (Eigen::Index b = 0; b < dy.n; ++b)
    for (Eigen::Index oy = 0; oy < dy.h; ++oy)
      for (Eigen::Index ox = 0; ox < dy.w; ++ox)
        for (Eigen::Index ch = 0; ch < dy.c; ++ch) {
          const T g = dy.at(b, oy, ox, ch) * T(0.25);
          dx.at(b, 2 * oy, 2 * ox, ch) += g;
          dx.at(b, 2 * oy, 2 * ox + 1, ch) += g;
          dx.at(b, 2 * oy + 1, 2 * ox, ch) += g;
          dx.at(b, 2 * oy + 1, 2 * ox + 1, ch) += g;
        }
}

template <typename T>
void global_avg_pool_forward(const Tensor<T>& x, Tensor<T>& y) {
  y.resize(x.n, 1, 1, x.c);
  const T scale = T(1) / static_cast<T>(x.h * x.w);
  auto ym = y.as_matrix(x.n, x.c);
  ym.setZero();
  for (Eigen::Index b = 0; b < x.n; ++b) {
    auto xm = Eigen::Map<const MatrixX<T>>(x.data() + b * x.h * x.w * x.c,
                                           x.h * x.w, x.c);
    ym.row(b) = xm.colwise().sum() * scale;
  }
}

template <typename T>
void global_avg_pool_backward_add(const Tensor<T>& dy, Tensor<T>& dx) {
  const T scale = T(1) / static_cast<T>(dx.h * dx.w);
  for (Eigen::Index b = 0; b < dx.n; ++b) {
    auto dxm = Eigen::Map<MatrixX<T>>(dx.data() + b * dx.h * dx.w * dx.c,
                                      dx.h * dx.w, dx.c);
    auto dym = Eigen::Map<const MatrixX<T>>(dy.data() + b * dy.c, 1, dy.c);
    dxm.rowwise() += dym.row(0) * scale;
  }
}

/// Inverted dropout: surviving units are scaled by 1/keep so the expected
/// activation is unchanged; evaluation mode is the identity.
template <typename T>
void dropout_forward(const Tensor<T>& x, double keep, bool train,
                     RngStream& rng, Tensor<T>& y, ArrayX<T>& mask) {
  y.resize_like(x);
  if (!train || keep >= 1.0) {
    y.v = x.v;
    mask.resize(0);
    return;
  }
  if (mask.size() != x.size()) mask.resize(x.size());
  const T scale = static_cast<T>(1.0 / keep);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    mask[i] = rng.next_double() < keep ? scale : T(0);
  y.v = x.v * mask;
}

template <typename T>
void dropout_backward_add(const ArrayX<T>& mask, const Tensor<T>& dy,
                          Tensor<T>& dx) {
  if (mask.size() == 0)
    dx.v += dy.v;
  else
    dx.v += dy.v * mask;
}

template <typename T>
void concat_channels_forward(const Tensor<T>& a, const Tensor<T>& b,
                             Tensor<T>& y) {
  if (a.n != b.n || a.h != b.h || a.w != b.w)
    throw std::invalid_argument("concat: spatial shapes differ");
  y.resize(a.n, a.h, a.w, a.c + b.c);
  const Eigen::Index pixels = a.n * a.h * a.w;
  for (Eigen::Index p = 0; p < pixels; ++p) {
    std::memcpy(y.data() + p * y.c, a.data() + p * a.c,
                sizeof(T) * static_cast<std::size_t>(a.c));
    std::memcpy(y.data() + p * y.c + a.c, b.data() + p * b.c,
                sizeof(T) * static_cast<std::size_t>(b.c));
  }
}

template <typename T>
void concat_channels_backward_add(const Tensor<T>& dy, Tensor<T>& da,
                                  Tensor<T>& db) {
  const Eigen::Index pixels = dy.n * dy.h * dy.w;
  for (Eigen::Index p = 0; p < pixels; ++p) {
    const T* src = dy.data() + p * dy.c;
    T* pa = da.data() + p * da.c;
    T* pb = db.data() + p * db.c;
    for (Eigen::Index ch = 0; ch < da.c; ++ch) pa[ch] += src[ch];
    for (Eigen::Index ch = 0; ch < db.c; ++ch) pb[ch] += src[ch + da.c];
  }
}

}  // namespace octplaque
