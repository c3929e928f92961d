/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "qgda/model/grid.h"
#include "qgda/model/spectral.h"

namespace qgda::model {

/// Physical parameters of the two-layer model. Defaults follow the
/// thin-upper-layer configuration with an imposed upper-layer jet.
struct ModelParams {
  double delta = 0.05;   ///< upper/lower layer thickness ratio
  double u1 = 0.025;     ///< m/s
  double u2 = 0.0;       ///< m/s
  double beta = 5e-12;   ///< (m s)^-1
  double rek = 3.5e-8;   ///< bottom drag, 1/s
  double rd = 15000.0;   ///< deformation radius, m
  double dt = 3600.0;    ///< s
  bool nonlinear = true;
  bool filter = true;

  double f1() const { return 1.0 / (rd * rd * (1.0 + delta)); }
  double f2() const { return delta * f1(); }
  /// Background PV gradients of each layer.
  double qy1() const { return beta + f1() * (u1 - u2); }
  double qy2() const { return beta - f2() * (u1 - u2); }
  void validate() const;
};

/// Default parameters with a timestep scaled to the grid (2 h at 128 points).
ModelParams default_params(int n);

using SpectralField = std::vector<Complex>;

/// Two-layer PV in physical ([layer][iy][ix]) and half-spectral form, plus the
/// multistep tendency history the time stepper needs (newest first).
struct ModelState {
  GridSpec grid;
  std::vector<double> q;
  SpectralField qh;
  double t = 0.0;
  std::vector<SpectralField> history;
};

class QgModel {
 public:
  QgModel(GridSpec grid, ModelParams params);

  const GridSpec& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const SpectralTransform& transform() const { return fft_; }
  int spectral_size() const { return kLayers * fft_.spectral_size(); }

  /// Builds a consistent state from physical PV; the step history is empty.
  ModelState make_state(std::vector<double> q, double t = 0.0) const;
  ModelState make_state_spectral(SpectralField qh, double t = 0.0) const;
  /// Small-amplitude random PV confined to the dealiased band, zero mean.
  ModelState random_state(std::uint64_t seed, double amplitude_upper = 1e-6,
                          double amplitude_lower = 1e-7) const;

  SpectralField to_spectral(const std::vector<double>& q) const;
  std::vector<double> to_physical(const SpectralField& qh) const;

  /// Streamfunction from PV, mode by mode; the (0,0) mode is zero.
  SpectralField invert_pv(const SpectralField& qh) const;
  /// dq/dt in spectral space.
  SpectralField tendency(const ModelState& state) const;
  /// Advances one dt: forward Euler, then AB2, then AB3 once history allows,
  /// followed by the exponential small-scale filter.
  void step(ModelState& state) const;
  /// Snapshots at 0, every, 2*every, ... up to n_steps (inclusive).
  std::vector<ModelState> run_free(ModelState state, long n_steps, long snapshot_every) const;

  /// Layer-weighted total energy and enstrophy; both exact invariants of the
  /// unforced, undamped, dealiased system.
  double energy(const ModelState& state) const;
  double enstrophy(const ModelState& state) const;

  /// Wavenumbers (rad/m) of a half-spectrum index.
  double kx(int ikx) const { return kx_[ikx]; }
  double ky(int iky) const { return ky_[iky]; }
  bool dealiased(int iky, int ikx) const { return mask_[iky * fft_.nk() + ikx] != 0.0; }
  double filter_factor(int iky, int ikx) const { return filter_[iky * fft_.nk() + ikx]; }

 private:
  void check_finite(const SpectralField& f, double t, const char* what) const;

  GridSpec grid_;
  ModelParams params_;
  SpectralTransform fft_;
  std::vector<double> kx_, ky_;
  std::vector<double> kappa2_, mask_, filter_;
  // Derivative wavenumbers with the Nyquist entries zeroed.
  std::vector<double> dkx_, dky_;
};

}  // namespace qgda::model
