/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/da/cycles.h"

#include <string>

#include "qgda/da/kalman.h"
#include "qgda/error.h"

namespace qgda::da {

Method parse_method(std::string_view name) {
  if (name == "3dvar") return Method::ThreeDVar;
  if (name == "en3dvar") return Method::En3DVar;
  if (name == "enkf") return Method::EnKF;
  if (name == "unetkf") return Method::UNetKF;
  throw ConfigError("unknown DA method '" + std::string(name) + "' (3dvar, en3dvar, enkf, unetkf)");
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ThreeDVar: return "3dvar";
    case Method::En3DVar: return "en3dvar";
    case Method::EnKF: return "enkf";
    case Method::UNetKF: return "unetkf";
  }
  return "?";
}

void DAConfig::validate() const {
  if (members < 1) throw ConfigError("ensemble size must be >= 1");
  if (method == Method::EnKF && members < 2) throw ConfigError("enkf needs at least 2 members");
  if (method == Method::ThreeDVar && members != 1) throw ConfigError("3dvar runs a single state (members = 1)");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("relaxation factor must lie in [0, 1]");
  if (!(radius_m > 0.0)) throw ConfigError("localization radius must be positive");
  if (!(cycle_days > 0.0)) throw ConfigError("cycle interval must be positive");
  if (method == Method::UNetKF && network.empty()) throw ConfigError("unetkf needs a network checkpoint");
}

std::vector<double> member_obs_noise(const ObsBatch& obs, const CycleOptions& opts, int member) {
  Rng rng = make_rng(opts.seed, "obs-perturbation", static_cast<std::uint64_t>(opts.cycle),
                     static_cast<std::uint64_t>(member));
  return draw_obs_noise(obs, rng);
}

namespace {

void check_obs(const ObsBatch& obs) {
  if (obs.values.size() != 2 * obs.locations.size()) throw ConfigError("observation batch is inconsistent");
}

// Shared by every ensemble method so equal gain terms give equal analyses.
void member_updates(Ensemble& ens, const cov::GainTerms& terms, const cov::LinearObsOperator& h, const ObsBatch& obs,
                    bool perturb, const CycleOptions& opts) {
  const KalmanSolver solver(terms, obs.r_diag());
  for (int i = 0; i < ens.size(); ++i) {
    std::vector<double>& x = ens.members()[i];
    std::vector<double> d = obs.values;
    const std::vector<double> hx = h.apply(x);
    if (perturb) {
      const std::vector<double> eps = member_obs_noise(obs, opts, i);
      for (size_t k = 0; k < d.size(); ++k) d[k] -= hx[k] + eps[k];
    } else {
      for (size_t k = 0; k < d.size(); ++k) d[k] -= hx[k];
    }
    const std::vector<double> dx = solver.increment(d);
    for (size_t a = 0; a < x.size(); ++a) x[a] += dx[a];
  }
}

void relax_members(Ensemble& ens, const std::vector<double>& prior_mean,
                   std::vector<std::vector<double>> prior_members, double alpha) {
  for (auto& m : prior_members)
    for (size_t a = 0; a < m.size(); ++a) m[a] -= prior_mean[a];
  ens.refresh();
  const std::vector<double> mean = ens.mean();
  std::vector<std::vector<double>> post = ens.members();
  for (auto& m : post)
    for (size_t a = 0; a < m.size(); ++a) m[a] -= mean[a];
  relax_to_prior(prior_members, post, alpha);
  for (int i = 0; i < ens.size(); ++i)
    for (size_t a = 0; a < mean.size(); ++a) ens.members()[i][a] = mean[a] + post[i][a];
  ens.refresh();
}

void perturbed_obs_update(Ensemble& ens, const cov::EnsemblePerturbations& pert, const cov::GainTerms& terms,
                          const cov::LinearObsOperator& h, const ObsBatch& obs, double alpha, bool perturb,
                          const CycleOptions& opts) {
  const std::vector<std::vector<double>> prior = ens.members();
  member_updates(ens, terms, h, obs, perturb, opts);
  if (ens.size() >= 2) {
    relax_members(ens, pert.mean(), prior, alpha);
  } else {
    ens.refresh();
  }
}

}  // namespace

cov::GainTerms background_gain_terms(const GridSpec& grid, const cov::ClimatologicalB& b,
                                     const cov::LinearObsOperator& h, const cov::Localizer& loc) {
  if (static_cast<int>(b.templ.size()) != cov::kPatchChannels * b.P * b.P) {
    throw ConfigError("background template has the wrong size for P=" + std::to_string(b.P));
  }
  const std::vector<double> scaled = b.scaled();
  return cov::patches_to_gain_terms(grid, b.P, [&](int) { return scaled.data(); }, h, loc);
}

void threedvar_cycle(Ensemble& state, const ObsBatch& obs, const cov::ClimatologicalB& b, const cov::Localizer& loc) {
  if (state.size() != 1) throw ConfigError("3dvar updates a single state");
  check_obs(obs);
  const cov::LinearObsOperator h = obs.op(state.grid());
  const cov::GainTerms terms = background_gain_terms(state.grid(), b, h, loc);
  member_updates(state, terms, h, obs, false, CycleOptions{});
  state.refresh();
}

void en3dvar_cycle(Ensemble& ens, const ObsBatch& obs, const cov::ClimatologicalB& b, const cov::Localizer& loc,
                   const CycleOptions& opts) {
  check_obs(obs);
  const cov::LinearObsOperator h = obs.op(ens.grid());
  const cov::GainTerms terms = background_gain_terms(ens.grid(), b, h, loc);
  member_updates(ens, terms, h, obs, opts.perturb_obs, opts);
  ens.refresh();
}

void enkf_cycle(Ensemble& ens, const ObsBatch& obs, const cov::Localizer& loc, double alpha,
                const CycleOptions& opts) {
  check_obs(obs);
  if (ens.size() < 2) throw ConfigError("enkf needs at least 2 members");
  const cov::EnsemblePerturbations pert(ens.members());
  if (opts.fail_on_collapse && pert.collapsed()) {
    throw NumericalError("ensemble spread collapsed to zero at cycle " + std::to_string(opts.cycle) +
                         "; increase the relaxation factor");
  }
  const cov::LinearObsOperator h = obs.op(ens.grid());
  const cov::GainTerms terms = cov::ensemble_cov_terms(ens.grid(), pert, h, loc);
  perturbed_obs_update(ens, pert, terms, h, obs, alpha, opts.perturb_obs, opts);
}

void unetkf_cycle(Ensemble& ens, const ObsBatch& obs, const PatchPredictor& predictor, const cov::Localizer& loc,
                  double alpha, const CycleOptions& opts) {
  check_obs(obs);
  const cov::EnsemblePerturbations pert(ens.members());
  const cov::LinearObsOperator h = obs.op(ens.grid());
  const int P = predictor.patch_side();
  const std::vector<int> centers = cov::required_patch_centers(ens.grid(), P, h);
  const cov::PatchSet patches = predictor.predict(ens.grid(), pert, centers);
  const cov::GainTerms terms = cov::patches_to_gain_terms(ens.grid(), P, patches.provider(), h, loc);
  perturbed_obs_update(ens, pert, terms, h, obs, alpha, opts.perturb_obs && ens.size() >= 2, opts);
}

}  // namespace qgda::da
