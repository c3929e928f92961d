/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "qgda/cov/covariance.h"
#include "qgda/cov/patches.h"
#include "qgda/da/ensemble.h"
#include "qgda/da/obs.h"

namespace qgda::da {

enum class Method { ThreeDVar, En3DVar, EnKF, UNetKF };

Method parse_method(std::string_view name);
std::string_view to_string(Method m);

struct DAConfig {
  Method method = Method::EnKF;
  int members = 20;
  double alpha = 0.55;        ///< relaxation to prior perturbations
  double radius_m = 100e3;    ///< GC length scale c
  double cycle_days = 10.0;
  std::string network;        ///< checkpoint path, unetkf only
  std::uint64_t seed = 1;

  /// enkf needs N >= 2, 3dvar N = 1; alpha in [0, 1]; radius > 0.
  void validate() const;
};

/// Source of covariance patches for UNetKF.
class PatchPredictor {
 public:
  virtual ~PatchPredictor() = default;
  virtual int patch_side() const = 0;
  virtual cov::PatchSet predict(const GridSpec& grid, const cov::EnsemblePerturbations& forecast,
                                std::span<const int> centers) const = 0;
};

/// Patches computed from the forecast ensemble itself.
class EnsemblePatchPredictor final : public PatchPredictor {
 public:
  explicit EnsemblePatchPredictor(int P) : P_(P) {}
  int patch_side() const override { return P_; }
  cov::PatchSet predict(const GridSpec& grid, const cov::EnsemblePerturbations& forecast,
                        std::span<const int> centers) const override {
    return cov::ensemble_patches(grid, forecast, P_, centers);
  }

 private:
  int P_;
};

struct CycleOptions {
  std::uint64_t seed = 0;
  long cycle = 0;
  /// Perturb observations per member (ensemble methods). Off only in tests.
  bool perturb_obs = true;
  /// Throw when all members coincide instead of returning the forecast.
  bool fail_on_collapse = true;
};

/// Observation perturbation for one member and cycle; independent stream each.
std::vector<double> member_obs_noise(const ObsBatch& obs, const CycleOptions& opts, int member);

/// Single-state update with the static background. Expects one member.
void threedvar_cycle(Ensemble& state, const ObsBatch& obs, const cov::ClimatologicalB& b,
                     const cov::Localizer& loc);

/// Independent 3DVar analyses of each member against its own perturbed observations.
void en3dvar_cycle(Ensemble& ens, const ObsBatch& obs, const cov::ClimatologicalB& b, const cov::Localizer& loc,
                   const CycleOptions& opts);

/// Perturbed-observation EnKF with Schur localization and relaxation to prior perturbations.
void enkf_cycle(Ensemble& ens, const ObsBatch& obs, const cov::Localizer& loc, double alpha,
                const CycleOptions& opts);

/// EnKF with the ensemble covariance replaced by predicted patches. A single
/// member gets one unperturbed update.
void unetkf_cycle(Ensemble& ens, const ObsBatch& obs, const PatchPredictor& predictor, const cov::Localizer& loc,
                  double alpha, const CycleOptions& opts);

/// Gain terms of the static background for this operator.
cov::GainTerms background_gain_terms(const GridSpec& grid, const cov::ClimatologicalB& b,
                                     const cov::LinearObsOperator& h, const cov::Localizer& loc);

}  // namespace qgda::da
