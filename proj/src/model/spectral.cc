/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/model/spectral.h"

#include <fftw3.h>

#include <algorithm>
#include <cassert>
#include <mutex>

namespace qgda::model {

namespace {
// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralTransform::Plans {
  int n;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  explicit Plans(int n_) : n(n_) {
    std::lock_guard lock(planner_mutex());
    const int nk = n / 2 + 1;
    double* re = fftw_alloc_real(static_cast<size_t>(n) * n);
    fftw_complex* co = fftw_alloc_complex(static_cast<size_t>(n) * nk);
    r2c = fftw_plan_dft_r2c_2d(n, n, re, co, FFTW_ESTIMATE);
    c2r = fftw_plan_dft_c2r_2d(n, n, co, re, FFTW_ESTIMATE);
    fftw_free(re);
    fftw_free(co);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SpectralTransform::SpectralTransform(int n) : n_(n), plans_(std::make_shared<Plans>(n)) {}

void SpectralTransform::forward(std::span<const double> phys, std::span<Complex> spec) const {
  assert(phys.size() == static_cast<size_t>(n_) * n_);
  assert(spec.size() == static_cast<size_t>(spectral_size()));
  double* re = fftw_alloc_real(phys.size());
  fftw_complex* co = fftw_alloc_complex(spec.size());
  std::copy(phys.begin(), phys.end(), re);
  fftw_execute_dft_r2c(plans_->r2c, re, co);
  std::copy_n(reinterpret_cast<const Complex*>(co), spec.size(), spec.begin());
  fftw_free(re);
  fftw_free(co);
}

void SpectralTransform::inverse(std::span<const Complex> spec, std::span<double> phys) const {
  assert(phys.size() == static_cast<size_t>(n_) * n_);
  assert(spec.size() == static_cast<size_t>(spectral_size()));
  double* re = fftw_alloc_real(phys.size());
  fftw_complex* co = fftw_alloc_complex(spec.size());
  std::copy(spec.begin(), spec.end(), reinterpret_cast<Complex*>(co));
  fftw_execute_dft_c2r(plans_->c2r, co, re);  // destroys co
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  for (size_t i = 0; i < phys.size(); ++i) phys[i] = re[i] * scale;
  fftw_free(re);
  fftw_free(co);
}

}  // namespace qgda::model
