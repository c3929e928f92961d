/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qgda/cov/patches.h"
#include "qgda/da/cycles.h"
#include "qgda/model/qg_model.h"
#include "qgda/model/snapshot_io.h"

namespace qgda::harness {

inline constexpr double kDay = 86400.0;

/// Parameters for an n-point grid, reading `physics.dt` as the 128-point
/// timestep and scaling it by 128 / n.
model::ModelParams params_for_grid(const model::ModelParams& physics, int n);

struct TruthConfig {
  int n = 128;
  double length = 1.0e6;
  /// Spin-up first runs on a coarse grid, then continues on the truth grid.
  int prespin_n = 32;
  double prespin_years = 10.0;
  double spinup_years = 2.0;
  int days = 730;  ///< stored segment, daily snapshots 0..days
  std::uint64_t seed = 1;

  void validate() const;
};

/// Daily snapshots of the nature run; time zero is the end of spin-up.
struct Truth {
  model::GridSpec grid;
  std::vector<model::Snapshot> daily;

  int days() const { return static_cast<int>(daily.size()) - 1; }
};

Truth make_truth(const TruthConfig& cfg, const model::ModelParams& physics);
/// Rebuilds a truth from a stored daily trajectory.
Truth truth_from_trajectory(std::vector<model::Snapshot> daily);

/// One observation batch per cycle at days start_day + c * cycle_days, each
/// from its own seed-derived stream.
std::vector<da::ObsBatch> make_observations(const Truth& truth, const da::ObsSpec& spec, int cycle_days,
                                            int cycles, int start_day, std::uint64_t seed);

struct InitConfig {
  double spinup_years = 6.0;
  double member_spacing_days = 30.0;
};

/// Independent states of a free run on `grid`, one every member_spacing_days
/// after spin-up from a seeded random state. The first k states do not depend
/// on `count`, so differently sized ensembles share members.
std::vector<std::vector<double>> climatological_states(const model::GridSpec& grid, const model::ModelParams& p,
                                                       int count, const InitConfig& cfg, std::uint64_t seed);

struct BackgroundConfig {
  double years = 20.0;
  double spacing_days = 10.0;
  double window_days = 60.0;
  int P = 16;
  std::array<double, 2> layer_scale{1.0, 1.0};
};

/// Climatological B from a free control run on the DA grid.
cov::ClimatologicalB control_background(const model::GridSpec& grid, const model::ModelParams& p,
                                        const BackgroundConfig& cfg, const InitConfig& init, std::uint64_t seed);

/// Per-layer RMSE of a state against the truth regridded (bilinear) to the state's grid.
std::array<double, 2> layer_rmse(const model::GridSpec& grid, std::span<const double> state,
                                 const model::Snapshot& truth);

/// RMSE series of a trajectory against the truth at matching times.
std::array<std::vector<double>, 2> rmse_series(std::span<const model::Snapshot> analysis,
                                               std::span<const model::Snapshot> truth, const model::GridSpec& grid);

struct ExperimentConfig {
  std::string name = "default";
  da::DAConfig da;
  bool control = false;  ///< free run of the first initial state, no assimilation
  model::GridSpec grid = model::GridSpec::create(32);
  model::ModelParams model = model::default_params(32);
  int start_day = 0;
  int cycles = 36;
  InitConfig init;
  int threads = 1;
  /// Training-sample extraction from forecast ensembles: 0 off, s > 0 takes
  /// centers on every s-th row and column (shifted each cycle).
  int extract_stride = 0;

  void validate() const;
};

struct ExperimentInputs {
  const Truth* truth = nullptr;
  std::span<const da::ObsBatch> obs;
  const cov::ClimatologicalB* background = nullptr;  ///< 3dvar, en3dvar
  const da::PatchPredictor* predictor = nullptr;     ///< unetkf
  cov::PatchDataset* dataset = nullptr;              ///< receives forecast samples
  std::function<void(int cycle, const da::Ensemble& forecast)> on_forecast;
};

struct ExperimentRecord {
  std::string name;
  std::string method;  ///< "control" or a DA method
  int members = 1;
  double alpha = 0.0;
  double radius_m = 0.0;
  int grid_n = 0;
  std::vector<double> day;  ///< days since the start of the truth segment
  std::array<std::vector<double>, 2> rmse;
  std::array<std::vector<double>, 2> spread;  ///< zeros for a single member

  bool operator==(const ExperimentRecord&) const = default;
};

/// Cycles the configured method through the observation stream: analysis at
/// each cycle day, daily forecasts in between. The recorded state is the
/// ensemble mean each day (the analysis on cycle days).
ExperimentRecord run_experiment(const ExperimentConfig& cfg, const ExperimentInputs& in);

/// Sample centers for one cycle: every point when stride is 0, otherwise every
/// stride-th row and column, offset by (c % stride, (c / stride) % stride).
std::vector<int> extraction_centers(int n, int stride, int cycle);

/// Runs fn(i) for i in [0, count) on up to `threads` threads.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace qgda::harness
