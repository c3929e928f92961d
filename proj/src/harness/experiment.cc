/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "qgda/cov/localization.h"
#include "qgda/error.h"
#include "qgda/harness/experiment.h"
#include "qgda/model/regrid.h"
#include "qgda/rng.h"

namespace qgda::harness {

using model::GridSpec;
using model::ModelParams;
using model::QgModel;
using model::Snapshot;

namespace {

constexpr double kYear = 365.0 * kDay;

long steps_for(double seconds, double dt) { return std::lround(seconds / dt); }

long steps_per_day(const ModelParams& p) {
  const long s = std::lround(kDay / p.dt);
  if (s < 1 || std::fabs(s * p.dt - kDay) > 1e-6 * kDay) {
    throw ConfigError("timestep " + std::to_string(p.dt) + " s does not divide a day");
  }
  return s;
}

void advance(const QgModel& m, model::ModelState& s, long steps) {
  for (long k = 0; k < steps; ++k) m.step(s);
}

Snapshot to_snapshot(const model::ModelState& s) { return Snapshot{s.grid.n, model::kLayers, s.t, s.q}; }

// Rethrows a library error with the cycle prefixed, keeping its kind.
[[noreturn]] void rethrow_at_cycle(int cycle) {
  const std::string where = "cycle " + std::to_string(cycle) + ": ";
  try {
    throw;
  } catch (const NumericalError& e) {
    throw NumericalError(where + e.what(), e.time());
  } catch (const IoError& e) {
    throw IoError(e.code(), where + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  }
}

}  // namespace

ModelParams params_for_grid(const ModelParams& physics, int n) {
  ModelParams p = physics;
  p.dt = physics.dt * 128.0 / n;
  p.validate();
  return p;
}

void TruthConfig::validate() const {
  GridSpec::create(n, length);
  GridSpec::create(prespin_n, length);
  if (prespin_years < 0.0 || spinup_years < 0.0) throw ConfigError("spin-up lengths must be >= 0");
  if (days < 0) throw ConfigError("truth segment length must be >= 0 days");
}

Truth make_truth(const TruthConfig& cfg, const ModelParams& physics) {
  cfg.validate();
  const GridSpec grid = GridSpec::create(cfg.n, cfg.length);
  const QgModel fine(grid, params_for_grid(physics, cfg.n));
  const long per_day = steps_per_day(fine.params());
  model::ModelState s;
  if (cfg.prespin_years > 0.0 && cfg.prespin_n != cfg.n) {
    const GridSpec cgrid = GridSpec::create(cfg.prespin_n, cfg.length);
    const QgModel coarse(cgrid, params_for_grid(physics, cfg.prespin_n));
    auto cs = coarse.random_state(derive_seed(cfg.seed, "truth-init"));
    advance(coarse, cs, steps_for(cfg.prespin_years * kYear, coarse.params().dt));
    s = fine.make_state(model::spectral_resample(cs.q, model::kLayers, cgrid, grid));
  } else {
    s = fine.random_state(derive_seed(cfg.seed, "truth-init"));
    advance(fine, s, steps_for(cfg.prespin_years * kYear, fine.params().dt));
  }
  advance(fine, s, steps_for(cfg.spinup_years * kYear, fine.params().dt));

  Truth truth;
  truth.grid = grid;
  truth.daily.reserve(cfg.days + 1);
  s.t = 0.0;
  for (int d = 0; d <= cfg.days; ++d) {
    if (d > 0) advance(fine, s, per_day);
    Snapshot snap = to_snapshot(s);
    snap.t = d * kDay;
    truth.daily.push_back(std::move(snap));
  }
  return truth;
}

Truth truth_from_trajectory(std::vector<Snapshot> daily) {
  if (daily.empty()) throw ConfigError("truth trajectory is empty");
  Truth t;
  t.grid = GridSpec::create(daily[0].n);
  for (std::size_t d = 0; d < daily.size(); ++d) {
    if (daily[d].n != t.grid.n || daily[d].layers != model::kLayers ||
        std::fabs(daily[d].t - static_cast<double>(d) * kDay) > 1.0) {
      throw ConfigError("truth trajectory must hold daily two-layer snapshots from day 0 (snapshot " +
                        std::to_string(d) + ")");
    }
  }
  t.daily = std::move(daily);
  return t;
}

std::vector<da::ObsBatch> make_observations(const Truth& truth, const da::ObsSpec& spec, int cycle_days,
                                            int cycles, int start_day, std::uint64_t seed) {
  spec.validate();
  if (cycle_days < 1 || cycles < 0 || start_day < 0) throw ConfigError("bad observation schedule");
  if (cycles > 0 && start_day + (cycles - 1) * cycle_days > truth.days()) {
    throw ConfigError("truth segment of " + std::to_string(truth.days()) + " days is too short for " +
                      std::to_string(cycles) + " cycles from day " + std::to_string(start_day));
  }
  std::vector<da::ObsBatch> out;
  out.reserve(cycles);
  for (int c = 0; c < cycles; ++c) {
    const int day = start_day + c * cycle_days;
    Rng rng = make_rng(seed, "obs", static_cast<std::uint64_t>(day));
    out.push_back(da::sample_observations(truth.grid, truth.daily[day].q, spec, rng, day * kDay));
  }
  return out;
}

std::vector<std::vector<double>> climatological_states(const GridSpec& grid, const ModelParams& p, int count,
                                                       const InitConfig& cfg, std::uint64_t seed) {
  if (count < 0) throw ConfigError("state count must be >= 0");
  if (!(cfg.member_spacing_days > 0.0) || cfg.spinup_years < 0.0) throw ConfigError("bad initial-state spacing");
  const QgModel m(grid, p);
  auto s = m.random_state(derive_seed(seed, "climate"));
  advance(m, s, steps_for(cfg.spinup_years * kYear, p.dt));
  const long spacing = std::max(1L, steps_for(cfg.member_spacing_days * kDay, p.dt));
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    advance(m, s, spacing);
    out.push_back(s.q);
  }
  return out;
}

cov::ClimatologicalB control_background(const GridSpec& grid, const ModelParams& p, const BackgroundConfig& cfg,
                                        const InitConfig& init, std::uint64_t seed) {
  if (!(cfg.years > 0.0) || !(cfg.spacing_days > 0.0)) throw ConfigError("bad control-run length or spacing");
  const QgModel m(grid, p);
  auto s = m.random_state(derive_seed(seed, "control"));
  advance(m, s, steps_for(init.spinup_years * kYear, p.dt));
  const long spacing = steps_for(cfg.spacing_days * kDay, p.dt);
  const long count = std::lround(cfg.years * 365.0 / cfg.spacing_days);
  std::vector<Snapshot> traj;
  traj.reserve(count + 1);
  s.t = 0.0;
  for (long k = 0; k <= count; ++k) {
    if (k > 0) advance(m, s, spacing);
    Snapshot snap = to_snapshot(s);
    snap.t = static_cast<double>(k) * spacing * p.dt;
    traj.push_back(std::move(snap));
  }
  auto b = cov::climatological_b(grid, traj, cfg.window_days * kDay, cfg.P);
  b.layer_scale = cfg.layer_scale;
  return b;
}

std::array<double, 2> layer_rmse(const GridSpec& grid, std::span<const double> state, const Snapshot& truth) {
  if (state.size() != static_cast<std::size_t>(grid.state_size())) throw ConfigError("state does not match grid");
  const GridSpec tgrid = GridSpec::create(truth.n, grid.length);
  std::vector<double> t = truth.n == grid.n ? truth.q : model::regrid(truth.q, model::kLayers, tgrid, grid);
  const int np = grid.points();
  std::array<double, 2> out{};
  for (int l = 0; l < model::kLayers; ++l) {
    double ss = 0.0;
    for (int i = 0; i < np; ++i) {
      const double e = state[l * np + i] - t[l * np + i];
      ss += e * e;
    }
    out[l] = std::sqrt(ss / np);
  }
  return out;
}

std::array<std::vector<double>, 2> rmse_series(std::span<const Snapshot> analysis, std::span<const Snapshot> truth,
                                               const GridSpec& grid) {
  if (analysis.size() != truth.size()) throw ConfigError("analysis and truth series differ in length");
  std::array<std::vector<double>, 2> out;
  for (std::size_t k = 0; k < analysis.size(); ++k) {
    if (std::fabs(analysis[k].t - truth[k].t) > 1.0) {
      throw ConfigError("analysis time " + std::to_string(analysis[k].t) + " s does not match truth time " +
                        std::to_string(truth[k].t) + " s at index " + std::to_string(k));
    }
    const auto r = layer_rmse(grid, analysis[k].q, truth[k]);
    out[0].push_back(r[0]);
    out[1].push_back(r[1]);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (!control) da.validate();
  model.validate();
  if (da.cycle_days != std::round(da.cycle_days)) throw ConfigError("cycle interval must be a whole number of days");
  if (cycles < 0 || start_day < 0) throw ConfigError("cycles and start day must be >= 0");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (extract_stride < 0) throw ConfigError("extract stride must be >= 0");
}

std::vector<int> extraction_centers(int n, int stride, int cycle) {
  if (stride < 0) throw ConfigError("extract stride must be >= 0");
  std::vector<int> centers;
  if (stride == 0) {
    centers.resize(static_cast<std::size_t>(n) * n);
    std::iota(centers.begin(), centers.end(), 0);
    return centers;
  }
  const int ox = cycle % stride, oy = (cycle / stride) % stride;
  for (int y = oy; y < n; y += stride)
    for (int x = ox; x < n; x += stride) centers.push_back(y * n + x);
  return centers;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& in) {
  cfg.validate();
  if (!in.truth) throw ConfigError("experiment needs a truth trajectory");
  const int cycle_days = static_cast<int>(cfg.da.cycle_days);
  const int last_day = cfg.start_day + cfg.cycles * cycle_days - 1;
  if (cfg.cycles > 0 && last_day > in.truth->days()) {
    throw ConfigError("truth segment ends at day " + std::to_string(in.truth->days()) + ", experiment needs day " +
                      std::to_string(last_day));
  }
  if (!cfg.control && static_cast<int>(in.obs.size()) < cfg.cycles) {
    throw ConfigError("observation stream has " + std::to_string(in.obs.size()) + " batches, need " +
                      std::to_string(cfg.cycles));
  }
  const da::Method method = cfg.da.method;
  if (!cfg.control) {
    if ((method == da::Method::ThreeDVar || method == da::Method::En3DVar) && !in.background) {
      throw ConfigError(std::string(da::to_string(method)) + " needs a climatological background");
    }
    if (method == da::Method::UNetKF && !in.predictor) throw ConfigError("unetkf needs a patch predictor");
  }

  ExperimentRecord rec;
  rec.name = cfg.name;
  rec.method = cfg.control ? "control" : std::string(da::to_string(method));
  rec.members = cfg.control ? 1 : cfg.da.members;
  rec.alpha = cfg.control ? 0.0 : cfg.da.alpha;
  rec.radius_m = cfg.control ? 0.0 : cfg.da.radius_m;
  rec.grid_n = cfg.grid.n;
  if (cfg.cycles == 0) return rec;

  const QgModel m(cfg.grid, cfg.model);
  const long per_day = steps_per_day(cfg.model);
  const int N = rec.members;
  const auto init = climatological_states(cfg.grid, cfg.model, N, cfg.init, derive_seed(cfg.da.seed, "init"));
  std::vector<model::ModelState> states;
  states.reserve(N);
  for (const auto& q : init) states.push_back(m.make_state(q, cfg.start_day * kDay));

  const cov::Localizer loc(cov::LocalizationSpec::create(cfg.da.radius_m, cfg.grid));
  auto record_day = [&](int day, const da::Ensemble& ens) {
    const auto r = layer_rmse(cfg.grid, ens.mean(), in.truth->daily[day]);
    const auto sp = ens.spread();
    rec.day.push_back(day);
    for (int l = 0; l < 2; ++l) {
      rec.rmse[l].push_back(r[l]);
      rec.spread[l].push_back(sp[l]);
    }
  };
  auto gather = [&] {
    std::vector<std::vector<double>> q(N);
    for (int i = 0; i < N; ++i) q[i] = states[i].q;
    return da::Ensemble(cfg.grid, std::move(q));
  };
  auto propagate_day = [&] {
    parallel_for(N, cfg.threads, [&](int i) { advance(m, states[i], per_day); });
  };

  for (int c = 0; c < cfg.cycles; ++c) {
    const int day = cfg.start_day + c * cycle_days;
    try {
      da::Ensemble ens = gather();
      if (in.dataset && cfg.extract_stride > 0 && N >= 2) {
        const auto centers = extraction_centers(cfg.grid.n, cfg.extract_stride, c);
        const cov::EnsemblePerturbations pert(ens.members());
        cov::extract_patch_samples(cfg.grid, pert, static_cast<std::uint64_t>(c), centers, *in.dataset);
      }
      if (in.on_forecast) in.on_forecast(c, ens);
      if (!cfg.control) {
        const da::ObsBatch& obs = in.obs[c];
        if (std::fabs(obs.time - day * kDay) > 1.0) {
          throw ConfigError("observation batch time " + std::to_string(obs.time / kDay) + " d does not match day " +
                            std::to_string(day));
        }
        da::CycleOptions opts;
        opts.seed = cfg.da.seed;
        opts.cycle = c;
        switch (method) {
          case da::Method::ThreeDVar: da::threedvar_cycle(ens, obs, *in.background, loc); break;
          case da::Method::En3DVar: da::en3dvar_cycle(ens, obs, *in.background, loc, opts); break;
          case da::Method::EnKF: da::enkf_cycle(ens, obs, loc, cfg.da.alpha, opts); break;
          case da::Method::UNetKF: da::unetkf_cycle(ens, obs, *in.predictor, loc, cfg.da.alpha, opts); break;
        }
        // The analysis starts a new forecast: the multistep history is discarded.
        for (int i = 0; i < N; ++i) states[i] = m.make_state(ens.member(i), day * kDay);
      }
      record_day(day, ens);
      for (int k = 1; k < cycle_days; ++k) {
        propagate_day();
        record_day(day + k, gather());
      }
      if (c + 1 < cfg.cycles) propagate_day();
    } catch (const Error&) {
      rethrow_at_cycle(c);
    }
  }
  return rec;
}

}  // namespace qgda::harness
