/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "qgda/error.h"
#include "qgda/harness/experiment.h"
#include "qgda/harness/report.h"
#include "qgda/harness/skill.h"
#include "qgda/harness/stats.h"
#include "qgda/rng.h"

using namespace qgda;
using namespace qgda::harness;

namespace {

std::vector<double> ar1(std::size_t n, double te, std::uint64_t seed, double mean = 0.0) {
  const double phi = std::exp(-1.0 / te);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, std::sqrt(1.0 - phi * phi));
  std::vector<double> x(n);
  double v = std::normal_distribution<double>(0.0, 1.0)(rng);
  for (auto& e : x) {
    v = phi * v + z(rng);
    e = mean + v;
  }
  return x;
}

Truth small_truth() {
  TruthConfig tc;
  tc.n = 32;
  tc.prespin_years = 0.0;
  tc.spinup_years = 0.3;
  tc.days = 40;
  tc.seed = 5;
  return make_truth(tc, model::default_params(128));
}

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.da.method = da::Method::EnKF;
  cfg.da.members = 4;
  cfg.da.alpha = 0.5;
  cfg.da.radius_m = 150e3;
  cfg.da.cycle_days = 5;
  cfg.da.seed = 3;
  cfg.model = params_for_grid(model::default_params(128), 32);
  cfg.start_day = 5;
  cfg.cycles = 3;
  cfg.init.spinup_years = 0.2;
  cfg.init.member_spacing_days = 5.0;
  return cfg;
}

}  // namespace

TEST_CASE("e-folding time of an AR(1) series") {
  const auto x = ar1(40000, 25.0, 11);
  CHECK(efolding_time(x, 1.0) == doctest::Approx(25.0).epsilon(0.15));
  CHECK(efolding_time(x, 0.5) == doctest::Approx(12.5).epsilon(0.15));
}

TEST_CASE("white noise keeps most of its degrees of freedom") {
  const auto x = ar1(3650, 1e-3, 2);
  CHECK(efolding_dof(x, 1.0) >= 500.0);
}

TEST_CASE("degrees of freedom follow N dt / (2 Te)") {
  const auto x = ar1(3650, 25.0, 4);
  const double te = efolding_time(x, 1.0);
  CHECK(efolding_dof(x, 1.0) == doctest::Approx(3650.0 / (2.0 * te)));
  // A 25-day e-folding over ten years leaves 73 degrees of freedom.
  CHECK(3650.0 * 1.0 / (2.0 * 25.0) == doctest::Approx(73.0));
}

TEST_CASE("e-folding time is invariant to affine maps") {
  const auto x = ar1(5000, 10.0, 8);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.7e-6 * x[i] - 42.0;
  CHECK(efolding_time(y, 1.0) == doctest::Approx(efolding_time(x, 1.0)).epsilon(1e-9));
}

TEST_CASE("autocorrelation rejects degenerate input") {
  const std::vector<double> flat(100, 2.0), tiny{1.0, 2.0};
  CHECK_THROWS_AS(autocorrelation(flat, 5), NumericalError);
  CHECK_THROWS_AS(autocorrelation(tiny, 1), ConfigError);
  const auto r = autocorrelation(ar1(500, 3.0, 1), 4);
  CHECK(r.size() == 5);
  CHECK(r[0] == doctest::Approx(1.0));
}

TEST_CASE("t-test on identical, shifted and independent series") {
  const auto a = ar1(730, 5.0, 21);
  const auto same = ttest_95(a, a, 1.0);
  CHECK(same.t == 0.0);
  CHECK_FALSE(same.significant);

  auto b = a;
  for (auto& v : b) v += 1.0;
  const auto shifted = ttest_95(b, a, 1.0);
  CHECK(shifted.mean_diff == doctest::Approx(1.0));
  CHECK(shifted.significant);

  int rejections = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    const auto x = ar1(730, 10.0, 1000 + 2 * k), y = ar1(730, 10.0, 1001 + 2 * k);
    rejections += ttest_95(x, y, 1.0).significant ? 1 : 0;
  }
  CHECK(rejections <= 15);  // 7.5% of 200
}

TEST_CASE("skill ratio of perfect and climatological predictions") {
  const int P = 4, per = 3 * P * P, count = 5;
  std::mt19937_64 rng(9);
  std::normal_distribution<float> z;
  std::vector<float> ref(per * count), clim(per);
  for (auto& v : ref) v = z(rng);
  for (auto& v : clim) v = z(rng);
  std::vector<float> clim_all;
  for (int i = 0; i < count; ++i) clim_all.insert(clim_all.end(), clim.begin(), clim.end());

  const auto perfect = cov_skill_ratio(ref, ref, clim, P);
  for (double r : perfect.ratio) CHECK(r == 0.0);
  const auto climo = cov_skill_ratio(clim_all, ref, clim, P);
  for (double r : climo.ratio) CHECK(r == doctest::Approx(1.0));
  const auto degenerate = cov_skill_ratio(ref, ref, ref, P);
  CHECK(std::isnan(degenerate.at(0, 0, 0)));
  CHECK_THROWS_AS(cov_skill_ratio(std::span(ref).first(per), ref, clim, P), ConfigError);
}

TEST_CASE("metrics csv round trip and report layout") {
  ExperimentRecord rec;
  rec.name = "x";
  rec.day = {10, 11, 12};
  rec.rmse = {std::vector<double>{1.25e-5, 1.0 / 3.0, 7.0}, std::vector<double>{2e-7, 3e-7, 4e-7}};
  rec.spread = {std::vector<double>{0, 0, 0}, std::vector<double>{1, 2, 3}};
  const auto back = parse_metrics_csv(metrics_csv(rec));
  CHECK(back.day == rec.day);
  CHECK(back.rmse == rec.rmse);
  CHECK(back.spread == rec.spread);
  CHECK_THROWS_AS(parse_metrics_csv("cycle_time,layer,rmse,spread\n1,3,0.1,0.1\n"), IoError);

  const std::string empty = report_csv({});
  CHECK(empty.find('\n') == empty.size() - 1);
  CHECK(empty.rfind("experiment,method,N,", 0) == 0);

  ExperimentRecord other = rec;
  other.name = "y";
  for (auto& v : other.rmse[0]) v *= 0.5;
  const std::vector<ExperimentRecord> runs{rec, other};
  const std::string rep = report_csv(runs);
  int lines = 0;
  for (char c : rep) lines += c == '\n';
  CHECK(lines == 3);
}

TEST_CASE("skill csv marks missing ratios") {
  SkillRatioMap m;
  m.P = 2;
  m.ratio.assign(12, 0.5);
  m.ratio[0] = std::nan("");
  const auto csv = skill_csv(m, 0);
  CHECK(csv.find("NA") != std::string::npos);
  CHECK(skill_csv(m, 1).find("NA") == std::string::npos);
}

TEST_CASE("experiments are deterministic and thread independent") {
  const Truth truth = small_truth();
  auto cfg = small_experiment();
  da::ObsSpec spec;
  spec.count = 30;
  const auto obs = make_observations(truth, spec, 5, cfg.cycles, cfg.start_day, 7);
  REQUIRE(obs.size() == 3);

  ExperimentInputs in;
  in.truth = &truth;
  in.obs = obs;
  const auto a = run_experiment(cfg, in);
  cfg.threads = 2;
  const auto b = run_experiment(cfg, in);
  CHECK(a == b);
  CHECK(a.day.size() == 15);
  CHECK(a.day.front() == 5.0);
  for (double s : a.spread[0]) CHECK(s > 0.0);

  cov::PatchDataset data;
  data.P = 8;
  cfg.extract_stride = 8;
  in.dataset = &data;
  const auto c = run_experiment(cfg, in);
  CHECK(c == a);
  CHECK(data.size() == 3 * 16);

  cfg.cycles = 0;
  const auto none = run_experiment(cfg, in);
  CHECK(none.day.empty());
  CHECK(none.method == "enkf");
}

TEST_CASE("experiment input validation") {
  const Truth truth = small_truth();
  auto cfg = small_experiment();
  da::ObsSpec spec;
  const auto obs = make_observations(truth, spec, 5, 3, 0, 7);
  ExperimentInputs in;
  in.truth = &truth;
  in.obs = obs;
  CHECK_THROWS_AS(run_experiment(cfg, in), ConfigError);  // batches start at day 0, cycles at day 5
  cfg.start_day = 0;
  cfg.cycles = 20;
  CHECK_THROWS_AS(run_experiment(cfg, in), ConfigError);
  cfg.cycles = 3;
  cfg.da.method = da::Method::ThreeDVar;
  cfg.da.members = 1;
  CHECK_THROWS_AS(run_experiment(cfg, in), ConfigError);

  const std::vector<model::Snapshot> shifted{truth.daily[1]};
  CHECK_THROWS(rmse_series(shifted, std::span(truth.daily).first(1), truth.grid));
  const auto zero = rmse_series(std::span(truth.daily).first(2), std::span(truth.daily).first(2), truth.grid);
  CHECK(zero[0][1] == 0.0);
}
