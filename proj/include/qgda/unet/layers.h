/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <Eigen/Core>
#include <vector>

namespace qgda::unet {

/// Activations are channel-major: one row per channel, columns run over
/// (sample, y, x) with x fastest.
template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape {
  int batch;
  int h;
  int w;
  int pixels() const { return batch * h * w; }
};

/// "Same" convolution, kernel k, padding k/2 before and k-1-k/2 after.
/// Weights [out][in][ky][kx]. Optional ReLU.
template <class T>
Mat<T> conv_forward(const Mat<T>& x, Shape s, const T* w, const T* b, int out, int k, bool relu);

/// Accumulates into dw/db; writes dx when non-null. `dy` is the gradient with
/// respect to the (post-activation) output `y`.
template <class T>
void conv_backward(const Mat<T>& x, Shape s, const T* w, int out, int k, const Mat<T>& y, bool relu,
                   const Mat<T>& dy, T* dw, T* db, Mat<T>* dx);

/// 2x2 max pooling with stride 2; argmax holds, per output element, the flat
/// index of the winning input element within its channel row.
template <class T>
Mat<T> maxpool_forward(const Mat<T>& x, Shape s, std::vector<int>& argmax);
template <class T>
Mat<T> maxpool_backward(const Mat<T>& dy, Shape s_in, const std::vector<int>& argmax);

/// 2x2 transposed convolution with stride 2 (doubles h and w). Weights
/// [in][out][ky][kx]. Linear.
template <class T>
Mat<T> upconv_forward(const Mat<T>& x, Shape s, const T* w, const T* b, int out);
template <class T>
void upconv_backward(const Mat<T>& x, Shape s, const T* w, int out, const Mat<T>& dy, T* dw, T* db, Mat<T>& dx);

/// Sample-major [b][c][y][x] <-> channel-major layout.
template <class T>
Mat<T> to_channel_major(const T* data, int batch, int channels, int h, int w);
template <class T>
void from_channel_major(const Mat<T>& m, int batch, int h, int w, T* data);

}  // namespace qgda::unet
