#pragma once

#include <Eigen/Dense>

#include <array>

namespace octplaque {

template <typename T>
using MatrixX =
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using ArrayX = Eigen::Array<T, Eigen::Dynamic, 1>;

/// Dense NHWC tensor on one flat Eigen array. Resizing keeps the existing
/// allocation when the element count is unchanged.
template <typename T>
struct Tensor {
  Eigen::Index n = 0, h = 0, w = 0, c = 0;
  ArrayX<T> v;

  Tensor() = default;
  Tensor(Eigen::Index n_, Eigen::Index h_, Eigen::Index w_, Eigen::Index c_) {
    resize(n_, h_, w_, c_);
  }

  void resize(Eigen::Index n_, Eigen::Index h_, Eigen::Index w_,
              Eigen::Index c_) {
    const Eigen::Index total = n_ * h_ * w_ * c_;
    if (v.size() != total) v.resize(total);
    n = n_;
    h = h_;
    w = w_;
    c = c_;
  }

  void resize_like(const Tensor& o) { resize(o.n, o.h, o.w, o.c); }

  Eigen::Index size() const { return n * h * w * c; }
  bool same_shape(const Tensor& o) const {
    return n == o.n && h == o.h && w == o.w && c == o.c;
  }

  void setZero() { v.setZero(); }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  T& at(Eigen::Index b, Eigen::Index y, Eigen::Index x, Eigen::Index ch) {
    return v[((b * h + y) * w + x) * c + ch];
  }
  const T& at(Eigen::Index b, Eigen::Index y, Eigen::Index x,
              Eigen::Index ch) const {
    return v[((b * h + y) * w + x) * c + ch];
  }

  /// View the flat buffer as a row-major matrix (rows * cols must equal
  /// size()).
  Eigen::Map<MatrixX<T>> as_matrix(Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<MatrixX<T>>(v.data(), rows, cols);
  }
  Eigen::Map<const MatrixX<T>> as_matrix(Eigen::Index rows,
                                         Eigen::Index cols) const {
    return Eigen::Map<const MatrixX<T>>(v.data(), rows, cols);
  }

  /// [N*H*W, C] view, the natural layout for channel-wise linear algebra.
  Eigen::Map<MatrixX<T>> by_channels() { return as_matrix(n * h * w, c); }
  Eigen::Map<const MatrixX<T>> by_channels() const {
    return as_matrix(n * h * w, c);
  }
};

using Shape4 = std::array<Eigen::Index, 4>;

inline Eigen::Index shape_size(const Shape4& s) {
  return s[0] * s[1] * s[2] * s[3];
}

}  // namespace octplaque
