/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace qgda::model {

using Complex = std::complex<double>;

/// Real-to-complex 2D transform of one n x n layer. The half spectrum is laid
/// out as [ky][kx] with kx in [0, n/2] and ky in FFT order; forward is
/// unnormalized and inverse divides by n^2, so inverse(forward(f)) == f.
class SpectralTransform {
 public:
  explicit SpectralTransform(int n);

  int n() const { return n_; }
  int nk() const { return n_ / 2 + 1; }
  int spectral_size() const { return n_ * nk(); }

  void forward(std::span<const double> phys, std::span<Complex> spec) const;
  void inverse(std::span<const Complex> spec, std::span<double> phys) const;

 private:
  struct Plans;
  int n_;
  std::shared_ptr<Plans> plans_;
};

}  // namespace qgda::model
