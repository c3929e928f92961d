/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "qgda/error.h"
#include "qgda/model/qg_model.h"
#include "qgda/model/regrid.h"
#include "qgda/model/snapshot_io.h"

using namespace qgda;
using namespace qgda::model;
using std::numbers::pi;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

ModelParams inviscid() {
  ModelParams p;
  p.u1 = p.u2 = 0.0;
  p.beta = 0.0;
  p.rek = 0.0;
  p.filter = false;
  return p;
}

// 2x2 linear operator of one Fourier mode: dq/dt = L q, written out from the
// layer equations independently of the model code.
Eigen::Matrix2cd linear_operator(const ModelParams& p, double k, double l) {
  const std::complex<double> I(0, 1);
  const double k2 = k * k + l * l;
  Eigen::Matrix2d m;
  m << -(k2 + p.f1()), p.f1(), p.f2(), -(k2 + p.f2());
  const Eigen::Matrix2cd minv = m.inverse().cast<std::complex<double>>();
  Eigen::Matrix2cd adv = Eigen::Matrix2cd::Zero();
  adv(0, 0) = -I * k * p.u1;
  adv(1, 1) = -I * k * p.u2;
  Eigen::Matrix2cd grad = Eigen::Matrix2cd::Zero();
  grad(0, 0) = -I * k * p.qy1();
  grad(1, 1) = -I * k * p.qy2();
  grad(1, 1) += p.rek * k2;
  return adv + grad * minv;
}

}  // namespace

TEST_CASE("invert_pv: zero in, zero out") {
  QgModel m(GridSpec::create(16), default_params(16));
  SpectralField qh(m.spectral_size(), Complex{});
  for (const Complex& c : m.invert_pv(qh)) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("invert_pv: barotropic limit decouples into Poisson inversions") {
  ModelParams p = default_params(16);
  p.rd = 1e12;  // F1, F2 -> 0
  QgModel m(GridSpec::create(16), p);
  SpectralField qh(m.spectral_size(), Complex{});
  const int nk = m.transform().nk();
  const int ns = m.transform().spectral_size();
  qh[3 * nk + 2] = {1.0, -0.5};
  qh[ns + 5 * nk + 1] = {0.25, 2.0};
  const SpectralField ph = m.invert_pv(qh);
  const double k2a = m.kx(2) * m.kx(2) + m.ky(3) * m.ky(3);
  const double k2b = m.kx(1) * m.kx(1) + m.ky(5) * m.ky(5);
  CHECK(std::abs(ph[3 * nk + 2] - (-qh[3 * nk + 2] / k2a)) < 1e-12 * std::abs(qh[3 * nk + 2] / k2a));
  CHECK(std::abs(ph[ns + 5 * nk + 1] - (-qh[ns + 5 * nk + 1] / k2b)) <
        1e-12 * std::abs(qh[ns + 5 * nk + 1] / k2b));
}

TEST_CASE("invert_pv matches a dense solve of the coupled physical-space system on 8x8") {
  const int n = 8, np = n * n;
  QgModel m(GridSpec::create(n), default_params(n));
  const ModelParams& p = m.params();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::vector<double> q(2 * np);
  for (auto& v : q) v = normal(rng);
  // Oracle works on mean-free PV: the (0,0) mode is not invertible.
  for (int l = 0; l < 2; ++l) {
    double mean = 0.0;
    for (int i = 0; i < np; ++i) mean += q[l * np + i];
    for (int i = 0; i < np; ++i) q[l * np + i] -= mean / np;
  }

  // Dense spectral Laplacian built from explicit DFT sums.
  const double k0 = 2 * pi / m.grid().length;
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(np, np);
  for (int a = 0; a < np; ++a) {
    for (int b = 0; b < np; ++b) {
      const int dxi = (a % n) - (b % n), dyi = (a / n) - (b / n);
      double acc = 0.0;
      for (int ky = -n / 2; ky < n / 2; ++ky)
        for (int kx = -n / 2; kx < n / 2; ++kx) {
          const double kk = k0 * k0 * (kx * kx + ky * ky);
          acc += -kk * std::cos(2 * pi * (kx * dxi + ky * dyi) / n);
        }
      lap(a, b) = acc / np;
    }
  }
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(2 * np + 2, 2 * np);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(np, np);
  sys.block(0, 0, np, np) = lap - p.f1() * eye;
  sys.block(0, np, np, np) = p.f1() * eye;
  sys.block(np, 0, np, np) = p.f2() * eye;
  sys.block(np, np, np, np) = lap - p.f2() * eye;
  // Zero-mean streamfunction, scaled like the other rows so the QR rank test is fair.
  sys.block(2 * np, 0, 1, np).setConstant(p.f1());
  sys.block(2 * np + 1, np, 1, np).setConstant(p.f1());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * np + 2);
  for (int i = 0; i < 2 * np; ++i) rhs(i) = q[i];
  const Eigen::VectorXd psi_dense = sys.colPivHouseholderQr().solve(rhs);

  const std::vector<double> psi = m.to_physical(m.invert_pv(m.to_spectral(q)));
  double err = 0.0, ref = 0.0;
  for (int i = 0; i < 2 * np; ++i) {
    err = std::max(err, std::fabs(psi[i] - psi_dense(i)));
    ref = std::max(ref, std::fabs(psi_dense(i)));
  }
  CHECK(err < 1e-10 * ref);
}

TEST_CASE("tendency vanishes for the rest state without mean flow") {
  ModelParams p = default_params(32);
  p.u1 = p.u2 = 0.0;
  QgModel m(GridSpec::create(32), p);
  const ModelState s = m.make_state(std::vector<double>(m.grid().state_size(), 0.0));
  for (const Complex& c : m.tendency(s)) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("linearized single zonal mode oscillates at the two-layer Rossby eigenfrequencies") {
  ModelParams p = default_params(32);
  p.nonlinear = false;
  QgModel m(GridSpec::create(32), p);
  const int ikx = 3;
  const Eigen::Matrix2cd lop = linear_operator(p, m.kx(ikx), 0.0);
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(lop);
  const int nk = m.transform().nk();
  const int ns = m.transform().spectral_size();
  for (int e = 0; e < 2; ++e) {
    SpectralField qh(m.spectral_size(), Complex{});
    const Eigen::Vector2cd v = es.eigenvectors().col(e) * 1e-6;
    qh[ikx] = v(0);
    qh[ns + ikx] = v(1);
    const ModelState s = m.make_state_spectral(qh);
    const SpectralField dq = m.tendency(s);
    const Complex lambda = es.eigenvalues()(e);
    CHECK(std::abs(dq[ikx] - lambda * v(0)) < 1e-9 * std::abs(lambda * v(0)) + 1e-30);
    CHECK(std::abs(dq[ns + ikx] - lambda * v(1)) < 1e-9 * std::abs(lambda) * v.norm());
    double other = 0.0;
    for (int s2 = 0; s2 < m.spectral_size(); ++s2)
      if (s2 != ikx && s2 != ns + ikx) other = std::max(other, std::abs(dq[s2]));
    CHECK(other < 1e-12 * std::abs(lambda) * v.norm());
    (void)nk;
  }
}

TEST_CASE("tendency agrees with a physical-space finite-difference evaluation on smooth fields") {
  const int n = 64;
  ModelParams p = default_params(n);
  QgModel m(GridSpec::create(n), p);
  const double k0 = 2 * pi / m.grid().length, dx = m.grid().dx();
  const int np = n * n;
  // Analytic streamfunctions with a handful of low modes.
  auto psi_fn = [&](int l, double x, double y) {
    const double a = l == 0 ? 3e3 : 1e3;
    return a * (std::sin(k0 * x + 0.3) * std::cos(2 * k0 * y) + 0.7 * std::cos(k0 * (x + y)) +
                0.4 * std::sin(2 * k0 * x - k0 * y + 1.1 * l));
  };
  auto sample = [&](auto fn) {
    std::vector<double> f(2 * np);
    for (int l = 0; l < 2; ++l)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) f[l * np + j * n + i] = fn(l, i * dx, j * dx);
    return f;
  };
  const std::vector<double> psi = sample(psi_fn);
  // Sixth-order centered first and second differences on the periodic grid.
  auto d1 = [&](const std::vector<double>& f, int off, int i, int j, bool along_x) {
    auto at = [&](int s) {
      return along_x ? f[off + j * n + (i + s + n) % n] : f[off + ((j + s + n) % n) * n + i];
    };
    return (-at(-3) + 9 * at(-2) - 45 * at(-1) + 45 * at(1) - 9 * at(2) + at(3)) / (60 * dx);
  };
  auto d2 = [&](const std::vector<double>& f, int off, int i, int j, bool along_x) {
    auto at = [&](int s) {
      return along_x ? f[off + j * n + (i + s + n) % n] : f[off + ((j + s + n) % n) * n + i];
    };
    return (2 * at(-3) - 27 * at(-2) + 270 * at(-1) - 490 * at(0) + 270 * at(1) - 27 * at(2) + 2 * at(3)) /
           (180 * dx * dx);
  };
  std::vector<double> q(2 * np), lap(2 * np);
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int s = j * n + i;
        lap[l * np + s] = d2(psi, l * np, i, j, true) + d2(psi, l * np, i, j, false);
      }
  for (int s = 0; s < np; ++s) {
    q[s] = lap[s] + p.f1() * (psi[np + s] - psi[s]);
    q[np + s] = lap[np + s] + p.f2() * (psi[s] - psi[np + s]);
  }
  const ModelState state = m.make_state(q);
  const std::vector<double> model_dq = m.to_physical(m.tendency(state));

  std::vector<double> oracle(2 * np);
  const double u[2] = {p.u1, p.u2}, qy[2] = {p.qy1(), p.qy2()};
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int o = l * np;
        const double ux = -d1(psi, o, i, j, false), vy = d1(psi, o, i, j, true);
        double t = -(ux * d1(q, o, i, j, true) + vy * d1(q, o, i, j, false));
        t -= u[l] * d1(q, o, i, j, true) + qy[l] * d1(psi, o, i, j, true);
        if (l == 1) t -= p.rek * lap[o + j * n + i];
        oracle[o + j * n + i] = t;
      }
  double err = 0.0;
  for (int i = 0; i < 2 * np; ++i) err = std::max(err, std::fabs(oracle[i] - model_dq[i]));
  CHECK(err < 1e-3 * max_abs(oracle));
}

TEST_CASE("tendency rejects non-finite state") {
  QgModel m(GridSpec::create(16), default_params(16));
  std::vector<double> q(m.grid().state_size(), 0.0);
  q[5] = std::nan("");
  ModelState s = m.make_state(q);
  CHECK_THROWS_AS(m.tendency(s), NumericalError);
  try {
    m.step(s);
  } catch (const NumericalError& e) {
    CHECK(e.time().has_value());
  }
}

TEST_CASE("step leaves the rest state unchanged") {
  ModelParams p = default_params(32);
  p.u1 = p.u2 = 0.0;
  QgModel m(GridSpec::create(32), p);
  ModelState s = m.make_state(std::vector<double>(m.grid().state_size(), 0.0));
  for (int k = 0; k < 5; ++k) m.step(s);
  CHECK(max_abs(s.q) == 0.0);
  CHECK(s.t == doctest::Approx(5 * p.dt));
}

TEST_CASE("inviscid dealiased run conserves energy and enstrophy") {
  ModelParams p = inviscid();
  p.dt = 600.0;
  QgModel m(GridSpec::create(64), p);
  ModelState s = m.random_state(11, 2e-6, 1e-7);
  const double e0 = m.energy(s), z0 = m.enstrophy(s);
  for (int k = 0; k < 100; ++k) m.step(s);
  CHECK(std::fabs(m.energy(s) - e0) < 1e-6 * e0);
  CHECK(std::fabs(m.enstrophy(s) - z0) < 1e-6 * z0);
}

TEST_CASE("domain-mean PV is preserved by stepping") {
  QgModel m(GridSpec::create(32), default_params(32));
  ModelState s = m.random_state(3, 7e-6, 1.2e-7);
  std::vector<double> q = s.q;
  const int np = m.grid().points();
  for (int i = 0; i < np; ++i) {
    q[i] += 2e-6;
    q[np + i] -= 3e-8;
  }
  s = m.make_state(q);
  auto means = [&](const ModelState& st) {
    double a = 0, b = 0;
    for (int i = 0; i < np; ++i) {
      a += st.q[i];
      b += st.q[np + i];
    }
    return std::pair{a / np, b / np};
  };
  const auto [m1, m2] = means(s);
  for (int k = 0; k < 100; ++k) m.step(s);
  const auto [n1, n2] = means(s);
  CHECK(std::fabs(n1 - m1) < 1e-12 * 7e-6);
  CHECK(std::fabs(n2 - m2) < 1e-12 * 1.2e-7);
}

TEST_CASE("physical fields stay real: conjugate symmetry on the kx = 0 column") {
  QgModel m(GridSpec::create(32), default_params(32));
  ModelState s = m.random_state(5, 7e-6, 1.2e-7);
  for (int k = 0; k < 20; ++k) m.step(s);
  const int n = 32, nk = m.transform().nk(), ns = m.transform().spectral_size();
  double norm = 0.0, resid = 0.0;
  for (const Complex& c : s.qh) norm = std::max(norm, std::abs(c));
  for (int l = 0; l < 2; ++l)
    for (int j = 1; j < n; ++j)
      resid = std::max(resid, std::abs(s.qh[l * ns + j * nk] - std::conj(s.qh[l * ns + (n - j) * nk])));
  CHECK(resid < 1e-10 * norm);
  // And the round trip reproduces the physical field.
  const std::vector<double> back = m.to_physical(m.to_spectral(s.q));
  double err = 0.0;
  for (size_t i = 0; i < back.size(); ++i) err = std::max(err, std::fabs(back[i] - s.q[i]));
  CHECK(err < 1e-12 * max_abs(s.q));
}

TEST_CASE("AB3 is third-order accurate once its history is primed") {
  ModelParams p = default_params(64);
  p.nonlinear = false;
  p.filter = false;
  QgModel m(GridSpec::create(64), p);
  const int nk = m.transform().nk(), ns = m.transform().spectral_size();
  // A few modes, each evolving exactly under its 2x2 operator.
  struct Mode {
    int j, i;
    Eigen::Vector2cd q0;
  };
  std::vector<Mode> modes = {{0, 2, {Complex(1e-6, 0), Complex(2e-8, 1e-8)}},
                             {3, 5, {Complex(3e-7, -4e-7), Complex(-1e-8, 5e-9)}},
                             {62, 7, {Complex(-2e-7, 1e-7), Complex(3e-9, 0)}}};
  auto exact = [&](double t) {
    SpectralField qh(m.spectral_size(), Complex{});
    for (const Mode& md : modes) {
      const Eigen::Matrix2cd lop = linear_operator(p, m.kx(md.i), m.ky(md.j));
      Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(lop);
      const Eigen::Matrix2cd v = es.eigenvectors();
      Eigen::Vector2cd e;
      e << std::exp(es.eigenvalues()(0) * t), std::exp(es.eigenvalues()(1) * t);
      const Eigen::Vector2cd qt = v * e.asDiagonal() * v.inverse() * md.q0;
      qh[md.j * nk + md.i] = qt(0);
      qh[ns + md.j * nk + md.i] = qt(1);
    }
    return qh;
  };
  const double horizon = 40 * 86400.0;
  auto run_error = [&](double dt) {
    ModelParams pp = p;
    pp.dt = dt;
    QgModel mm(m.grid(), pp);
    ModelState s = mm.make_state_spectral(exact(0.0));
    s.history = {mm.tendency(mm.make_state_spectral(exact(-dt))),
                 mm.tendency(mm.make_state_spectral(exact(-2 * dt)))};
    const long steps = std::lround(horizon / dt);
    for (long k = 0; k < steps; ++k) mm.step(s);
    const SpectralField ref = exact(horizon);
    double err = 0.0, nrm = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
      err += std::norm(s.qh[i] - ref[i]);
      nrm += std::norm(ref[i]);
    }
    return std::sqrt(err / nrm);
  };
  const double e1 = run_error(86400.0), e2 = run_error(43200.0), e3 = run_error(21600.0);
  MESSAGE("AB3 errors: " << e1 << " " << e2 << " " << e3);
  CHECK(e1 / e2 == doctest::Approx(8.0).epsilon(0.2));
  CHECK(e2 / e3 == doctest::Approx(8.0).epsilon(0.2));
}

TEST_CASE("run_free returns snapshots at the requested cadence, deterministically") {
  QgModel m(GridSpec::create(32), default_params(32));
  const ModelState s0 = m.random_state(9);
  const auto only = m.run_free(s0, 0, 1);
  REQUIRE(only.size() == 1);
  CHECK(only[0].q == s0.q);
  const auto a = m.run_free(s0, 30, 10);
  const auto b = m.run_free(s0, 30, 10);
  REQUIRE(a.size() == 4);
  for (size_t k = 0; k < a.size(); ++k) CHECK(a[k].q == b[k].q);
  CHECK(a[3].t == doctest::Approx(30 * m.params().dt));
  CHECK_THROWS_AS(m.run_free(s0, -1, 1), ConfigError);
}

TEST_CASE("spin-up from small random PV develops growing eddy variance") {
  QgModel m(GridSpec::create(32), default_params(32));
  const ModelState s0 = m.random_state(21, 1e-6, 1e-7);
  const long per_day = std::lround(86400.0 / m.params().dt);
  const auto traj = m.run_free(s0, 3 * 365 * per_day, 365 * per_day);
  auto upper_var = [&](const ModelState& s) {
    double v = 0;
    for (int i = 0; i < m.grid().points(); ++i) v += s.q[i] * s.q[i];
    return v / m.grid().points();
  };
  CHECK(upper_var(traj.back()) > 4.0 * upper_var(traj.front()));
}

TEST_CASE("regrid keeps constants under every method") {
  const GridSpec g128 = GridSpec::create(128), g32 = GridSpec::create(32), g64 = GridSpec::create(64);
  std::vector<double> c(2 * 128 * 128, 0.0);
  std::fill(c.begin(), c.begin() + 128 * 128, 3.5);
  std::fill(c.begin() + 128 * 128, c.end(), -1.25);
  for (auto method : {RegridMethod::Bilinear, RegridMethod::AreaWeighted, RegridMethod::Cubic}) {
    const auto d = regrid(c, 2, g128, g32, method);
    for (int i = 0; i < 32 * 32; ++i) {
      CHECK(d[i] == doctest::Approx(3.5).epsilon(1e-14));
      CHECK(d[32 * 32 + i] == doctest::Approx(-1.25).epsilon(1e-14));
    }
  }
  std::vector<double> c32(2 * 32 * 32, 0.75);
  for (auto method : {RegridMethod::Bilinear, RegridMethod::Cubic}) {
    for (double v : regrid(c32, 2, g32, g64, method)) CHECK(v == doctest::Approx(0.75).epsilon(1e-14));
  }
}

TEST_CASE("regrid: coincident nodes reproduce a sampled sinusoid exactly") {
  const GridSpec g64 = GridSpec::create(64), g32 = GridSpec::create(32);
  std::vector<double> f(64 * 64);
  const double k0 = 2 * pi / g64.length;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) f[j * 64 + i] = std::sin(k0 * i * g64.dx()) + 0.5;
  const auto c = regrid(f, 1, g64, g32, RegridMethod::Bilinear);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) CHECK(c[j * 32 + i] == doctest::Approx(f[(2 * j) * 64 + 2 * i]));
}

TEST_CASE("regrid round trip 128 -> 32 -> 128 of a band-limited field stays within the bilinear bound") {
  const GridSpec g128 = GridSpec::create(128), g32 = GridSpec::create(32);
  const double k0 = 2 * pi / g128.length;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(-1, 1);
  struct Wave {
    int kx, ky;
    double a, ph;
  };
  std::vector<Wave> waves;
  for (int w = 0; w < 6; ++w) waves.push_back({int(unif(rng) * 8), int(unif(rng) * 8), unif(rng), 3 * unif(rng)});
  std::vector<double> f(128 * 128);
  double curv = 0.0;  // bound on |f_xx| + |f_yy|
  for (const Wave& w : waves) curv += std::fabs(w.a) * k0 * k0 * (w.kx * w.kx + w.ky * w.ky);
  for (int j = 0; j < 128; ++j)
    for (int i = 0; i < 128; ++i) {
      double v = 0;
      for (const Wave& w : waves) v += w.a * std::cos(k0 * g128.dx() * (w.kx * i + w.ky * j) + w.ph);
      f[j * 128 + i] = v;
    }
  const auto back = regrid(regrid(f, 1, g128, g32), 1, g32, g128);
  double err = 0;
  for (size_t i = 0; i < f.size(); ++i) err = std::max(err, std::fabs(back[i] - f[i]));
  // Coarse nodes coincide with fine ones, so only the upsampling errs, bounded by h^2/8 * (|f_xx| + |f_yy|).
  const double bound = g32.dx() * g32.dx() / 8.0 * curv;
  CHECK(err <= bound);
  CHECK(err > 0.0);
}

TEST_CASE("regrid rejects mismatched domains and area-weighted upscaling") {
  std::vector<double> f(32 * 32, 1.0);
  CHECK_THROWS_AS(regrid(f, 1, GridSpec::create(32, 1e6), GridSpec::create(64, 2e6)), ConfigError);
  CHECK_THROWS_AS(regrid(f, 1, GridSpec::create(32), GridSpec::create(64), RegridMethod::AreaWeighted),
                  ConfigError);
  CHECK_THROWS_AS(parse_regrid_method("nearest"), ConfigError);
}

TEST_CASE("spectral_resample is exact for band-limited fields") {
  const GridSpec g32 = GridSpec::create(32), g128 = GridSpec::create(128);
  QgModel m(g32, default_params(32));
  const ModelState s = m.random_state(2, 1.0, 0.5);
  const auto up = spectral_resample(s.q, 2, g32, g128);
  const auto down = spectral_resample(up, 2, g128, g32);
  double err = 0;
  for (size_t i = 0; i < s.q.size(); ++i) err = std::max(err, std::fabs(down[i] - s.q[i]));
  CHECK(err < 1e-12);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) CHECK(up[(4 * j) * 128 + 4 * i] == doctest::Approx(s.q[j * 32 + i]));
}

TEST_CASE("snapshot and trajectory files round-trip and reject corruption") {
  Snapshot a{16, 2, 86400.0, std::vector<double>(2 * 16 * 16)};
  for (size_t i = 0; i < a.q.size(); ++i) a.q[i] = std::sin(0.1 * i) * 1e-6;
  Snapshot b = a;
  b.t = 2 * 86400.0;
  b.q[3] = -4.0;
  CHECK(decode_snapshot(encode_snapshot(a)) == a);
  const std::vector<Snapshot> traj{a, b};
  CHECK(decode_trajectory(encode_trajectory(traj)) == traj);

  auto bytes = encode_trajectory(traj);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 100);
  try {
    decode_trajectory(truncated);
    FAIL("expected truncation error");
  } catch (const IoError& e) {
    CHECK(e.code() == IoError::Code::Truncated);
  }
  auto flipped = bytes;
  flipped[200] ^= std::byte{0x10};
  try {
    decode_trajectory(flipped);
    FAIL("expected checksum error");
  } catch (const IoError& e) {
    CHECK(e.code() == IoError::Code::Checksum);
  }
  auto badmagic = encode_snapshot(a);
  badmagic[0] = std::byte{'X'};
  try {
    decode_snapshot(badmagic);
    FAIL("expected magic error");
  } catch (const IoError& e) {
    CHECK(e.code() == IoError::Code::BadMagic);
  }
  auto badver = encode_snapshot(a);
  badver[4] = std::byte{9};
  try {
    decode_snapshot(badver);
    FAIL("expected version error");
  } catch (const IoError& e) {
    CHECK(e.code() == IoError::Code::Version);
    CHECK(std::string(e.what()).find("9") != std::string::npos);
  }
}
