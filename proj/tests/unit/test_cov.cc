/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "qgda/cov/covariance.h"
#include "qgda/cov/localization.h"
#include "qgda/cov/patches.h"
#include "qgda/error.h"

using namespace qgda;
using namespace qgda::cov;

namespace {

std::vector<std::vector<double>> random_members(int n_members, int size, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<std::vector<double>> m(n_members, std::vector<double>(size));
  for (auto& v : m)
    for (double& x : v) x = normal(rng);
  return m;
}

LinearObsOperator random_operator(const GridSpec& g, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, g.length);
  std::vector<Location> locs(m);
  for (auto& l : locs) l = {unif(rng), unif(rng)};
  return LinearObsOperator::bilinear(g, locs);
}

// Straight from the sample covariance definition.
Eigen::MatrixXd dense_b(const std::vector<std::vector<double>>& members) {
  const int n = static_cast<int>(members.size()), s = static_cast<int>(members[0].size());
  Eigen::MatrixXd x(s, n);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < s; ++a) x(a, i) = members[i][a];
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd xp = x.colwise() - mean;
  return xp * xp.transpose() / (n - 1);
}

Eigen::MatrixXd dense_w(const Localizer& loc) {
  const GridSpec& g = loc.grid();
  const int s = g.state_size(), np = g.points();
  Eigen::MatrixXd w(s, s);
  for (int a = 0; a < s; ++a)
    for (int b = 0; b < s; ++b) {
      const int ax = (a % np) % g.n, ay = (a % np) / g.n, bx = (b % np) % g.n, by = (b % np) / g.n;
      double dx = std::fabs(ax - bx), dy = std::fabs(ay - by);
      dx = std::min(dx, g.n - dx) * g.dx();
      dy = std::min(dy, g.n - dy) * g.dx();
      w(a, b) = gaspari_cohn(std::sqrt(dx * dx + dy * dy), loc.spec().radius_m);
    }
  return w;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace

TEST_CASE("gaspari_cohn: endpoints, inner-branch value, errors") {
  CHECK(gaspari_cohn(0.0, 1e5) == 1.0);
  CHECK(gaspari_cohn(2e5, 1e5) == 0.0);
  CHECK(gaspari_cohn(3e5, 1e5) == 0.0);
  // 1 - 5/3 r^2 + 5/8 r^3 + 1/2 r^4 - 1/4 r^5 at r = 1/2.
  const double r = 0.5;
  const double inner = 1 - 5.0 / 3 * r * r + 5.0 / 8 * r * r * r + 0.5 * std::pow(r, 4) - 0.25 * std::pow(r, 5);
  CHECK(gaspari_cohn(5e4, 1e5) == doctest::Approx(inner).epsilon(1e-14));
  CHECK(inner == doctest::Approx(0.685).epsilon(1e-3));
  CHECK_THROWS_AS(gaspari_cohn(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(gaspari_cohn(1.0, -3.0), ConfigError);
  CHECK(gaspari_cohn(1e9, INFINITY) == 1.0);
}

TEST_CASE("gaspari_cohn is continuous and nonincreasing over a fine sweep") {
  const double c = 7.3e4;
  double prev = gaspari_cohn(0.0, c);
  double max_jump = 0.0;
  for (int k = 1; k <= 10000; ++k) {
    const double v = gaspari_cohn(2.2 * c * k / 10000.0, c);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    max_jump = std::max(max_jump, prev - v);
    prev = v;
  }
  CHECK(max_jump < 1e-3);
  // The two branches meet at r = 1.
  CHECK(gaspari_cohn(c * (1 - 1e-12), c) == doctest::Approx(gaspari_cohn(c * (1 + 1e-12), c)).epsilon(1e-9));
}

TEST_CASE("localization weights: unit diagonal, compact support, translation invariance") {
  const GridSpec g = GridSpec::create(16);
  const Localizer loc(LocalizationSpec::create(100e3, g));
  for (int i = 0; i < g.points(); ++i) CHECK(loc(i, i) == 1.0);
  CHECK(loc(g.index(0, 0), g.index(8, 8)) == 0.0);
  CHECK(loc(g.index(0, 0), g.index(4, 0)) == 0.0);  // 250 km > 2c
  CHECK(loc(g.index(0, 0), g.index(1, 0)) == doctest::Approx(gaspari_cohn(62.5e3, 100e3)));
  // Patch-shaped weights around every center coincide exactly.
  const int P = 8;
  const std::vector<double> ref = loc.patch_weights(P);
  for (int c = 0; c < g.points(); ++c) {
    for (int py = 0; py < P; ++py)
      for (int px = 0; px < P; ++px) {
        const int to = g.index(c % g.n + px - P / 2, c / g.n + py - P / 2);
        CHECK(loc(c, to) == ref[py * P + px]);
      }
  }
  CHECK_THROWS_AS(LocalizationSpec::create(0.0, g), ConfigError);
}

TEST_CASE("ensemble_cov_terms matches the dense sample-covariance oracle") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> pick_n(2, 12), pick_m(1, 6);
  std::uniform_real_distribution<double> radius(4e4, 4e5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const GridSpec g = GridSpec::create(trial % 2 == 0 ? 4 : 8);
    const auto members = random_members(pick_n(rng), g.state_size(), rng, 1e-6);
    const LinearObsOperator h = random_operator(g, pick_m(rng), rng);
    const LocalizationSpec spec =
        trial % 3 == 0 ? LocalizationSpec::none(g) : LocalizationSpec::create(radius(rng), g);
    const Localizer loc(spec);
    const EnsemblePerturbations pert(members);
    const GainTerms terms = ensemble_cov_terms(g, pert, h, loc);

    const Eigen::MatrixXd b = dense_b(members).cwiseProduct(dense_w(loc));
    const Eigen::MatrixXd hd = h.dense();
    const Eigen::MatrixXd bht = b * hd.transpose();
    const Eigen::MatrixXd hbht = hd * bht;
    worst = std::max({worst, rel_err(terms.bht, bht), rel_err(terms.hbht, hbht)});
    CHECK(terms.hbht == terms.hbht.transpose());
  }
  MESSAGE("worst relative error " << worst);
  CHECK(worst < 1e-12);
}

TEST_CASE("ensemble_cov_terms: identical members give zero, fewer than 2 members throw") {
  const GridSpec g = GridSpec::create(8);
  std::mt19937_64 rng(3);
  auto members = random_members(1, g.state_size(), rng);
  members.push_back(members[0]);
  members.push_back(members[0]);
  const LinearObsOperator h = random_operator(g, 3, rng);
  const Localizer loc(LocalizationSpec::none(g));
  const GainTerms t = ensemble_cov_terms(g, EnsemblePerturbations(members), h, loc);
  CHECK(t.bht.cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.hbht.cwiseAbs().maxCoeff() == 0.0);
  members.resize(1);
  CHECK_THROWS_AS(ensemble_cov_terms(g, EnsemblePerturbations(members), h, loc), ConfigError);
}

TEST_CASE("duplicating every member rescales the covariance by 2(N-1)/(2N-1)") {
  const GridSpec g = GridSpec::create(8);
  std::mt19937_64 rng(8);
  const auto members = random_members(5, g.state_size(), rng);
  auto doubled = members;
  doubled.insert(doubled.end(), members.begin(), members.end());
  const LinearObsOperator h = random_operator(g, 4, rng);
  const Localizer loc(LocalizationSpec::create(2e5, g));
  const GainTerms a = ensemble_cov_terms(g, EnsemblePerturbations(members), h, loc);
  const GainTerms b = ensemble_cov_terms(g, EnsemblePerturbations(doubled), h, loc);
  const double ratio = 2.0 * 4 / 9;
  CHECK(rel_err(b.hbht, a.hbht * ratio) < 1e-12);
  CHECK(rel_err(b.bht, a.bht * ratio) < 1e-12);
  // Same perturbation rank.
  Eigen::MatrixXd xa(g.state_size(), 5), xb(g.state_size(), 10);
  const EnsemblePerturbations pa(members), pb(doubled);
  for (int s = 0; s < g.state_size(); ++s) {
    for (int i = 0; i < 5; ++i) xa(s, i) = pa.anomaly(s, i);
    for (int i = 0; i < 10; ++i) xb(s, i) = pb.anomaly(s, i);
  }
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(xa).rank() == Eigen::FullPivLU<Eigen::MatrixXd>(xb).rank());
}

TEST_CASE("exact ensemble patches spanning the grid reproduce ensemble terms bitwise") {
  const GridSpec g = GridSpec::create(16);
  std::mt19937_64 rng(12);
  const auto members = random_members(10, g.state_size(), rng, 1e-6);
  const EnsemblePerturbations pert(members);
  const LinearObsOperator h = random_operator(g, 20, rng);
  const Localizer loc(LocalizationSpec::create(1.5e5, g));
  const PatchSet patches = ensemble_patches(g, pert, 16, required_patch_centers(g, 16, h));
  const GainTerms direct = ensemble_cov_terms(g, pert, h, loc);
  const GainTerms via = patches_to_gain_terms(g, 16, patches.provider(), h, loc);
  CHECK(direct.bht == via.bht);
  CHECK(direct.hbht == via.hbht);
}

TEST_CASE("ensemble patches narrower than the grid agree once localization fits inside them") {
  const GridSpec g = GridSpec::create(16);
  std::mt19937_64 rng(13);
  const auto members = random_members(10, g.state_size(), rng);
  const EnsemblePerturbations pert(members);
  const LinearObsOperator h = random_operator(g, 15, rng);
  // GC support 2c = 180 km stays inside the 4-cell half-width (250 km).
  const Localizer loc(LocalizationSpec::create(90e3, g));
  const PatchSet patches = ensemble_patches(g, pert, 8, required_patch_centers(g, 8, h));
  const GainTerms direct = ensemble_cov_terms(g, pert, h, loc);
  const GainTerms via = patches_to_gain_terms(g, 8, patches.provider(), h, loc);
  CHECK(rel_err(via.bht, direct.bht) < 1e-12);
  CHECK(rel_err(via.hbht, direct.hbht) < 1e-12);
}

TEST_CASE("patch gain terms: symmetric and nearly PSD for truncated, unsymmetric patches") {
  const GridSpec g = GridSpec::create(32);
  std::mt19937_64 rng(14);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int trial = 0; trial < 5; ++trial) {
    const auto members = random_members(12, g.state_size(), rng);
    const LinearObsOperator h = random_operator(g, 25, rng);
    PatchSet patches = ensemble_patches(g, EnsemblePerturbations(members), 16, required_patch_centers(g, 16, h));
    for (int c : patches.centers()) {  // mimic prediction error
      double* p = patches.patch(c);
      for (int k = 0; k < 3 * 256; ++k) p[k] *= 1.0 + noise(rng);
    }
    const Localizer loc(LocalizationSpec::create(1e5, g));
    const GainTerms t = patches_to_gain_terms(g, 16, patches.provider(), h, loc);
    CHECK(t.hbht == t.hbht.transpose());
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t.hbht).eigenvalues();
    CHECK(ev.minCoeff() >= -1e-8 * t.hbht.trace());
    for (int o = 0; o < t.hbht.rows(); ++o) CHECK(t.hbht(o, o) >= 0.0);
  }
}

TEST_CASE("single gridpoint observation with a delta patch gives a one-hot column") {
  const GridSpec g = GridSpec::create(16);
  const int P = 8, center = g.index(5, 9);
  std::vector<double> delta(3 * P * P, 0.0);
  delta[patch_slot(P, 0, 0)] = 1.0;
  const LinearObsOperator h(g.state_size(), {{{center, 1.0}}});
  const Localizer loc(LocalizationSpec::none(g));
  const GainTerms t = patches_to_gain_terms(g, P, [&](int) { return delta.data(); }, h, loc);
  for (int x = 0; x < g.state_size(); ++x) CHECK(t.bht(x, 0) == (x == center ? 1.0 : 0.0));
  CHECK(t.hbht(0, 0) == 1.0);
}

TEST_CASE("observations farther apart than the patch reach are uncorrelated") {
  const GridSpec g = GridSpec::create(32);
  const int P = 8;
  std::vector<double> ones(3 * P * P, 1.0);
  const int a = g.index(2, 2), b = g.index(12, 20);
  for (int la : {0, 1})
    for (int lb : {0, 1}) {
      const LinearObsOperator h(g.state_size(), {{{la * g.points() + a, 1.0}}, {{lb * g.points() + b, 1.0}}});
      const GainTerms t =
          patches_to_gain_terms(g, P, [&](int) { return ones.data(); }, h, Localizer(LocalizationSpec::none(g)));
      CHECK(t.hbht(0, 1) == 0.0);
      CHECK(t.hbht(0, 0) == 1.0);
    }
}

TEST_CASE("patch extraction: sample count, center variance, zero spread, translation equivariance") {
  const GridSpec g = GridSpec::create(32);
  std::mt19937_64 rng(15);
  const auto members = random_members(6, g.state_size(), rng);
  const EnsemblePerturbations pert(members);
  PatchDataset ds;
  ds.P = 16;
  extract_patch_samples(g, pert, 4, ds);
  REQUIRE(ds.size() == 1024);
  const Eigen::MatrixXd b = dense_b(members);
  const int h = 8, np = g.points();
  for (int c = 0; c < np; c += 37) {
    const CovPatchSample s = ds.at(c);
    CHECK(s.center == static_cast<std::uint32_t>(c));
    CHECK(s.cycle == 4u);
    CHECK(s.output[h * 16 + h] == doctest::Approx(b(c, c)).epsilon(1e-6));
    CHECK(s.output[2 * 256 + h * 16 + h] == doctest::Approx(b(np + c, np + c)).epsilon(1e-6));
    CHECK(s.output[256 + h * 16 + h] == doctest::Approx(b(c, np + c)).epsilon(1e-6));
    CHECK(s.input[h * 16 + h] == static_cast<float>(pert.mean()[c]));
  }

  // Shift every member by (3, 5) with periodic wrap.
  auto shifted = members;
  for (size_t i = 0; i < members.size(); ++i)
    for (int l = 0; l < 2; ++l)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) shifted[i][l * np + g.index(x + 3, y + 5)] = members[i][l * np + g.index(x, y)];
  PatchDataset ds2;
  ds2.P = 16;
  extract_patch_samples(g, EnsemblePerturbations(shifted), 4, ds2);
  for (int c = 0; c < np; ++c) {
    const CovPatchSample s1 = ds.at(c), s2 = ds2.at(g.index(c % 32 + 3, c / 32 + 5));
    CHECK(s1.input == s2.input);
    CHECK(s1.output == s2.output);
  }

  const std::vector<std::vector<double>> same(4, members[0]);
  PatchDataset ds3;
  ds3.P = 16;
  extract_patch_samples(g, EnsemblePerturbations(same), 0, ds3);
  for (float v : ds3.output) CHECK(v == 0.0f);

  PatchDataset big;
  big.P = 64;
  CHECK_THROWS_AS(extract_patch_samples(g, pert, 0, big), ConfigError);
}

TEST_CASE("climatological_b: constant trajectory, spectral vs brute force, white-noise variance") {
  const GridSpec g = GridSpec::create(8);
  const int P = 4, np = g.points();
  std::vector<model::Snapshot> constant(5, model::Snapshot{8, 2, 0.0, std::vector<double>(2 * np, 3.0)});
  for (int k = 0; k < 5; ++k) constant[k].t = k * 86400.0 * 10;
  const ClimatologicalB zero = climatological_b(g, constant, 20 * 86400.0, P);
  for (double v : zero.templ) CHECK(v == 0.0);
  CHECK(zero.samples == 3u);

  std::mt19937_64 rng(16);
  std::normal_distribution<double> normal;
  std::vector<model::Snapshot> traj(7);
  for (int k = 0; k < 7; ++k) {
    traj[k] = {8, 2, k * 5.0, std::vector<double>(2 * np)};
    for (double& v : traj[k].q) v = normal(rng);
  }
  const ClimatologicalB cb = climatological_b(g, traj, 10.0, P);
  const int pairs[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int ch = 0; ch < 3; ++ch)
    for (int oy = -2; oy < 2; ++oy)
      for (int ox = -2; ox < 2; ++ox) {
        double acc = 0.0;
        for (int k = 0; k + 2 < 7; ++k)
          for (int c = 0; c < np; ++c) {
            const int to = g.index(c % 8 + ox, c / 8 + oy);
            const double da = traj[k + 2].q[pairs[ch][0] * np + c] - traj[k].q[pairs[ch][0] * np + c];
            const double db = traj[k + 2].q[pairs[ch][1] * np + to] - traj[k].q[pairs[ch][1] * np + to];
            acc += da * db;
          }
        CHECK(cb.templ[ch * 16 + patch_slot(P, ox, oy)] == doctest::Approx(acc / (5.0 * np)).epsilon(1e-12));
      }

  // Independent draws with variance s^2: differences have variance 2 s^2.
  const GridSpec g32 = GridSpec::create(32);
  const double sd = 2e-6;
  std::normal_distribution<double> white(0.0, sd);
  std::vector<model::Snapshot> wt(40);
  for (int k = 0; k < 40; ++k) {
    wt[k] = {32, 2, k * 1.0, std::vector<double>(g32.state_size())};
    for (double& v : wt[k].q) v = white(rng);
  }
  const ClimatologicalB w = climatological_b(g32, wt, 1.0, 16);
  const double expect = 2 * sd * sd;
  // ~39 * 1024 products per offset: relative standard error ~ sqrt(2/40000).
  CHECK(w.templ[patch_slot(16, 0, 0)] == doctest::Approx(expect).epsilon(0.03));
  CHECK(w.templ[512 + patch_slot(16, 0, 0)] == doctest::Approx(expect).epsilon(0.03));
  CHECK(std::fabs(w.templ[patch_slot(16, 3, -2)]) < 0.03 * expect);
  CHECK(std::fabs(w.templ[256 + patch_slot(16, 0, 0)]) < 0.03 * expect);

  CHECK_THROWS_AS(climatological_b(g, traj, 100.0, P), ConfigError);
  CHECK_THROWS_AS(climatological_b(g, traj, 7.0, P), ConfigError);
}

TEST_CASE("patch dataset and background files round-trip and reject corruption") {
  const GridSpec g = GridSpec::create(16);
  std::mt19937_64 rng(17);
  PatchDataset ds;
  ds.P = 8;
  extract_patch_samples(g, EnsemblePerturbations(random_members(3, g.state_size(), rng)), 2, ds);
  CHECK(decode_patch_dataset(encode_patch_dataset(ds)) == ds);

  auto bytes = encode_patch_dataset(ds);
  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= std::byte{1};
  try {
    decode_patch_dataset(flipped);
    FAIL("expected checksum failure");
  } catch (const IoError& e) {
    CHECK(e.code() == IoError::Code::Checksum);
  }
  auto cut = bytes;
  cut.resize(bytes.size() / 3);
  try {
    decode_patch_dataset(cut);
    FAIL("expected truncation");
  } catch (const IoError& e) {
    CHECK(e.code() == IoError::Code::Truncated);
  }
  auto wrong_version = bytes;
  wrong_version[4] = std::byte{2};
  CHECK_THROWS_AS(decode_patch_dataset(wrong_version), IoError);

  ClimatologicalB b;
  b.P = 4;
  b.templ.assign(48, 0.0);
  for (size_t i = 0; i < b.templ.size(); ++i) b.templ[i] = 1e-11 * i;
  b.layer_scale = {1.5, 0.5};
  b.samples = 17;
  const ClimatologicalB back = decode_climatological_b(encode_climatological_b(b));
  CHECK(back.templ == b.templ);
  CHECK(back.layer_scale == b.layer_scale);
  CHECK(back.samples == 17u);
  const auto sc = b.scaled();
  CHECK(sc[1] == doctest::Approx(1.5 * b.templ[1]));
  CHECK(sc[16 + 1] == doctest::Approx(std::sqrt(0.75) * b.templ[17]));
}

TEST_CASE("required patch centers cover lower-layer neighborhoods") {
  const GridSpec g = GridSpec::create(32);
  const LinearObsOperator upper(g.state_size(), {{{g.index(4, 4), 1.0}}});
  CHECK(required_patch_centers(g, 8, upper) == std::vector<int>{g.index(4, 4)});
  const LinearObsOperator lower(g.state_size(), {{{g.points() + g.index(4, 4), 1.0}}});
  CHECK(required_patch_centers(g, 8, lower).size() == 81u);
}
