/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/unet/layers.h"

namespace qgda::unet {

namespace {

template <class T>
using CMap = Eigen::Map<const Mat<T>>;
template <class T>
using MMap = Eigen::Map<Mat<T>>;

template <class T>
Mat<T> im2col(const Mat<T>& x, Shape s, int k) {
  const int C = static_cast<int>(x.rows()), pb = k / 2, hw = s.h * s.w;
  Mat<T> cols = Mat<T>::Zero(static_cast<Eigen::Index>(C) * k * k, s.pixels());
  for (int c = 0; c < C; ++c) {
    const T* src = x.row(c).data();
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols.row((c * k + ky) * k + kx).data();
        const int oy = ky - pb, ox = kx - pb;
        const int x0 = std::max(0, -ox), x1 = std::min(s.w, s.w - ox);
        for (int b = 0; b < s.batch; ++b)
          for (int y = 0; y < s.h; ++y) {
            const int sy = y + oy;
            if (sy < 0 || sy >= s.h) continue;
            const T* srow = src + b * hw + sy * s.w + ox;
            T* drow = dst + b * hw + y * s.w;
            for (int xx = x0; xx < x1; ++xx) drow[xx] = srow[xx];
          }
      }
  }
  return cols;
}

template <class T>
Mat<T> col2im(const Mat<T>& cols, Shape s, int C, int k) {
  const int pb = k / 2, hw = s.h * s.w;
  Mat<T> dx = Mat<T>::Zero(C, s.pixels());
  for (int c = 0; c < C; ++c) {
    T* dst = dx.row(c).data();
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols.row((c * k + ky) * k + kx).data();
        const int oy = ky - pb, ox = kx - pb;
        const int x0 = std::max(0, -ox), x1 = std::min(s.w, s.w - ox);
        for (int b = 0; b < s.batch; ++b)
          for (int y = 0; y < s.h; ++y) {
            const int sy = y + oy;
            if (sy < 0 || sy >= s.h) continue;
            T* drow = dst + b * hw + sy * s.w + ox;
            const T* srow = src + b * hw + y * s.w;
            for (int xx = x0; xx < x1; ++xx) drow[xx] += srow[xx];
          }
      }
  }
  return dx;
}

}  // namespace

template <class T>
Mat<T> conv_forward(const Mat<T>& x, Shape s, const T* w, const T* b, int out, int k, bool relu) {
  const Eigen::Index K = x.rows() * k * k;
  Mat<T> y = CMap<T>(w, out, K) * im2col(x, s, k);
  for (int o = 0; o < out; ++o) y.row(o).array() += b[o];
  if (relu) y = y.cwiseMax(T(0));
  return y;
}

template <class T>
void conv_backward(const Mat<T>& x, Shape s, const T* w, int out, int k, const Mat<T>& y, bool relu,
                   const Mat<T>& dy, T* dw, T* db, Mat<T>* dx) {
  const int C = static_cast<int>(x.rows());
  const Eigen::Index K = static_cast<Eigen::Index>(C) * k * k;
  Mat<T> dz = relu ? Mat<T>(dy.array() * (y.array() > T(0)).template cast<T>()) : dy;
  const Mat<T> cols = im2col(x, s, k);
  MMap<T>(dw, out, K).noalias() += dz * cols.transpose();
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(db, out) += dz.rowwise().sum();
  if (dx) *dx = col2im<T>(CMap<T>(w, out, K).transpose() * dz, s, C, k);
}

template <class T>
Mat<T> maxpool_forward(const Mat<T>& x, Shape s, std::vector<int>& argmax) {
  const int C = static_cast<int>(x.rows()), h2 = s.h / 2, w2 = s.w / 2, hw = s.h * s.w;
  const int m_out = s.batch * h2 * w2;
  Mat<T> y(C, m_out);
  argmax.resize(static_cast<size_t>(C) * m_out);
  for (int c = 0; c < C; ++c) {
    const T* src = x.row(c).data();
    for (int b = 0; b < s.batch; ++b)
      for (int yy = 0; yy < h2; ++yy)
        for (int xx = 0; xx < w2; ++xx) {
          int best = b * hw + 2 * yy * s.w + 2 * xx;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int idx = b * hw + (2 * yy + dy) * s.w + 2 * xx + dx;
              if (src[idx] > src[best]) best = idx;
            }
          const int j = (b * h2 + yy) * w2 + xx;
          y(c, j) = src[best];
          argmax[static_cast<size_t>(c) * m_out + j] = best;
        }
  }
  return y;
}

template <class T>
Mat<T> maxpool_backward(const Mat<T>& dy, Shape s_in, const std::vector<int>& argmax) {
  const int C = static_cast<int>(dy.rows()), m_out = static_cast<int>(dy.cols());
  Mat<T> dx = Mat<T>::Zero(C, s_in.pixels());
  for (int c = 0; c < C; ++c)
    for (int j = 0; j < m_out; ++j) dx(c, argmax[static_cast<size_t>(c) * m_out + j]) += dy(c, j);
  return dx;
}

template <class T>
Mat<T> upconv_forward(const Mat<T>& x, Shape s, const T* w, const T* b, int out) {
  const int C = static_cast<int>(x.rows()), hw = s.h * s.w, W2 = 2 * s.w;
  const Mat<T> t = CMap<T>(w, C, out * 4).transpose() * x;
  Mat<T> y(out, 4 * s.pixels());
  for (int o = 0; o < out; ++o) {
    T* dst = y.row(o).data();
    for (int ky = 0; ky < 2; ++ky)
      for (int kx = 0; kx < 2; ++kx) {
        const T* src = t.row(o * 4 + ky * 2 + kx).data();
        for (int bb = 0; bb < s.batch; ++bb)
          for (int yy = 0; yy < s.h; ++yy)
            for (int xx = 0; xx < s.w; ++xx)
              dst[bb * 4 * hw + (2 * yy + ky) * W2 + 2 * xx + kx] = src[bb * hw + yy * s.w + xx] + b[o];
      }
  }
  return y;
}

template <class T>
void upconv_backward(const Mat<T>& x, Shape s, const T* w, int out, const Mat<T>& dy, T* dw, T* db, Mat<T>& dx) {
  const int C = static_cast<int>(x.rows()), hw = s.h * s.w, W2 = 2 * s.w;
  Mat<T> dt(out * 4, s.pixels());
  for (int o = 0; o < out; ++o) {
    const T* src = dy.row(o).data();
    db[o] += dy.row(o).sum();
    for (int ky = 0; ky < 2; ++ky)
      for (int kx = 0; kx < 2; ++kx) {
        T* dst = dt.row(o * 4 + ky * 2 + kx).data();
        for (int bb = 0; bb < s.batch; ++bb)
          for (int yy = 0; yy < s.h; ++yy)
            for (int xx = 0; xx < s.w; ++xx)
              dst[bb * hw + yy * s.w + xx] = src[bb * 4 * hw + (2 * yy + ky) * W2 + 2 * xx + kx];
      }
  }
  MMap<T>(dw, C, out * 4).noalias() += x * dt.transpose();
  dx = CMap<T>(w, C, out * 4) * dt;
}

template <class T>
Mat<T> to_channel_major(const T* data, int batch, int channels, int h, int w) {
  const int hw = h * w;
  Mat<T> m(channels, batch * hw);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < channels; ++c)
      std::copy(data + (static_cast<size_t>(b) * channels + c) * hw,
                data + (static_cast<size_t>(b) * channels + c + 1) * hw, m.row(c).data() + b * hw);
  return m;
}

template <class T>
void from_channel_major(const Mat<T>& m, int batch, int h, int w, T* data) {
  const int hw = h * w, channels = static_cast<int>(m.rows());
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < channels; ++c)
      std::copy(m.row(c).data() + b * hw, m.row(c).data() + (b + 1) * hw,
                data + (static_cast<size_t>(b) * channels + c) * hw);
}

#define QGDA_INSTANTIATE_LAYERS(T)                                                                        \
  template Mat<T> conv_forward<T>(const Mat<T>&, Shape, const T*, const T*, int, int, bool);              \
  template void conv_backward<T>(const Mat<T>&, Shape, const T*, int, int, const Mat<T>&, bool,           \
                                 const Mat<T>&, T*, T*, Mat<T>*);                                         \
  template Mat<T> maxpool_forward<T>(const Mat<T>&, Shape, std::vector<int>&);                            \
  template Mat<T> maxpool_backward<T>(const Mat<T>&, Shape, const std::vector<int>&);                     \
  template Mat<T> upconv_forward<T>(const Mat<T>&, Shape, const T*, const T*, int);                       \
  template void upconv_backward<T>(const Mat<T>&, Shape, const T*, int, const Mat<T>&, T*, T*, Mat<T>&); \
  template Mat<T> to_channel_major<T>(const T*, int, int, int, int);                                     \
  template void from_channel_major<T>(const Mat<T>&, int, int, int, T*);

QGDA_INSTANTIATE_LAYERS(float)
QGDA_INSTANTIATE_LAYERS(double)

}  // namespace qgda::unet
