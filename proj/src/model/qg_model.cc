/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/model/qg_model.h"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "qgda/error.h"

namespace qgda::model {

namespace {
constexpr Complex kI{0.0, 1.0};
constexpr double kFilterFactor = 23.6;
constexpr double kFilterCutoff = 0.65 * std::numbers::pi;
}  // namespace

void ModelParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("model.delta must lie in (0, 1)");
  if (!(dt > 0.0)) throw ConfigError("model.dt must be positive");
  if (!(rd > 0.0)) throw ConfigError("model.rd must be positive");
  if (!(rek >= 0.0)) throw ConfigError("model.rek must be nonnegative");
}

ModelParams default_params(int n) {
  ModelParams p;
  p.dt = 7200.0 * 128.0 / n;
  return p;
}

QgModel::QgModel(GridSpec grid, ModelParams params)
    : grid_(GridSpec::create(grid.n, grid.length)), params_(params), fft_(grid.n) {
  params_.validate();
  const int n = grid_.n;
  const int nk = fft_.nk();
  const double k0 = 2.0 * std::numbers::pi / grid_.length;
  kx_.resize(nk);
  ky_.resize(n);
  dkx_.resize(nk);
  dky_.resize(n);
  for (int i = 0; i < nk; ++i) {
    kx_[i] = k0 * i;
    dkx_[i] = (i == n / 2) ? 0.0 : kx_[i];
  }
  for (int j = 0; j < n; ++j) {
    const int js = j <= n / 2 ? j : j - n;
    ky_[j] = k0 * js;
    dky_[j] = (j == n / 2) ? 0.0 : ky_[j];
  }
  kappa2_.resize(static_cast<size_t>(n) * nk);
  mask_.resize(kappa2_.size());
  filter_.resize(kappa2_.size());
  const double dx = grid_.dx();
  for (int j = 0; j < n; ++j) {
    const int js = j <= n / 2 ? j : j - n;
    for (int i = 0; i < nk; ++i) {
      const size_t s = static_cast<size_t>(j) * nk + i;
      kappa2_[s] = kx_[i] * kx_[i] + ky_[j] * ky_[j];
      mask_[s] = (3 * i < n && 3 * std::abs(js) < n) ? 1.0 : 0.0;
      const double wv = std::sqrt(kappa2_[s]) * dx;
      filter_[s] = wv > kFilterCutoff ? std::exp(-kFilterFactor * std::pow(wv - kFilterCutoff, 4)) : 1.0;
    }
  }
}

SpectralField QgModel::to_spectral(const std::vector<double>& q) const {
  const size_t np = grid_.points();
  const size_t ns = fft_.spectral_size();
  SpectralField qh(kLayers * ns);
  for (int l = 0; l < kLayers; ++l) {
    fft_.forward(std::span(q).subspan(l * np, np), std::span(qh).subspan(l * ns, ns));
  }
  return qh;
}

std::vector<double> QgModel::to_physical(const SpectralField& qh) const {
  const size_t np = grid_.points();
  const size_t ns = fft_.spectral_size();
  std::vector<double> q(kLayers * np);
  for (int l = 0; l < kLayers; ++l) {
    fft_.inverse(std::span(qh).subspan(l * ns, ns), std::span(q).subspan(l * np, np));
  }
  return q;
}

ModelState QgModel::make_state(std::vector<double> q, double t) const {
  if (q.size() != static_cast<size_t>(grid_.state_size())) {
    throw ConfigError("state size " + std::to_string(q.size()) + " does not match grid " +
                      std::to_string(grid_.n));
  }
  ModelState s;
  s.grid = grid_;
  s.qh = to_spectral(q);
  s.q = std::move(q);
  s.t = t;
  return s;
}

ModelState QgModel::make_state_spectral(SpectralField qh, double t) const {
  ModelState s;
  s.grid = grid_;
  s.q = to_physical(qh);
  s.qh = std::move(qh);
  s.t = t;
  return s;
}

ModelState QgModel::random_state(std::uint64_t seed, double amplitude_upper, double amplitude_lower) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> q(grid_.state_size());
  for (auto& v : q) v = normal(rng);
  SpectralField qh = to_spectral(q);
  const size_t ns = fft_.spectral_size();
  for (int l = 0; l < kLayers; ++l) {
    for (size_t s = 0; s < ns; ++s) qh[l * ns + s] *= mask_[s];
    qh[l * ns] = 0.0;
  }
  q = to_physical(qh);
  const size_t np = grid_.points();
  const double amp[kLayers] = {amplitude_upper, amplitude_lower};
  for (int l = 0; l < kLayers; ++l) {
    double ss = 0.0;
    for (size_t p = 0; p < np; ++p) ss += q[l * np + p] * q[l * np + p];
    const double scale = ss > 0.0 ? amp[l] / std::sqrt(ss / np) : 0.0;
    for (size_t s = 0; s < ns; ++s) qh[l * ns + s] *= scale;
  }
  return make_state_spectral(std::move(qh));
}

SpectralField QgModel::invert_pv(const SpectralField& qh) const {
  const size_t ns = fft_.spectral_size();
  const double f1 = params_.f1();
  const double f2 = params_.f2();
  SpectralField ph(qh.size());
  // [-(k2+F1), F1; F2, -(k2+F2)] psi = q
  for (size_t s = 1; s < ns; ++s) {
    const double k2 = kappa2_[s];
    const double a = -(k2 + f1), b = f1, c = f2, d = -(k2 + f2);
    const double det = a * d - b * c;  // = k2 (k2 + F1 + F2) > 0
    const Complex q1 = qh[s], q2 = qh[ns + s];
    ph[s] = (d * q1 - b * q2) / det;
    ph[ns + s] = (-c * q1 + a * q2) / det;
  }
  ph[0] = 0.0;
  ph[ns] = 0.0;
  return ph;
}

SpectralField QgModel::tendency(const ModelState& state) const {
  const int n = grid_.n;
  const int nk = fft_.nk();
  const size_t np = grid_.points();
  const size_t ns = fft_.spectral_size();
  check_finite(state.qh, state.t, "state");

  const SpectralField ph = invert_pv(state.qh);
  SpectralField out(state.qh.size());
  const double u[kLayers] = {params_.u1, params_.u2};
  const double qy[kLayers] = {params_.qy1(), params_.qy2()};

  std::vector<double> uphys(np), vphys(np), qphys(np);
  SpectralField work(ns), fluxx(ns), fluxy(ns);
  for (int l = 0; l < kLayers; ++l) {
    const Complex* psi = ph.data() + l * ns;
    const Complex* q = state.qh.data() + l * ns;
    Complex* dq = out.data() + l * ns;
    if (params_.nonlinear) {
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < nk; ++i) work[j * nk + i] = -kI * dky_[j] * psi[j * nk + i];
      fft_.inverse(work, uphys);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < nk; ++i) work[j * nk + i] = kI * dkx_[i] * psi[j * nk + i];
      fft_.inverse(work, vphys);
      fft_.inverse(std::span(state.qh).subspan(l * ns, ns), qphys);
      for (size_t p = 0; p < np; ++p) {
        const double qq = qphys[p];
        uphys[p] *= qq;
        vphys[p] *= qq;
      }
      fft_.forward(uphys, fluxx);
      fft_.forward(vphys, fluxy);
    }
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < nk; ++i) {
        const size_t s = static_cast<size_t>(j) * nk + i;
        Complex t = -kI * dkx_[i] * (u[l] * q[s] + qy[l] * psi[s]);
        if (params_.nonlinear) {
          // flux form of J(psi, q) = d(uq)/dx + d(vq)/dy
          t -= mask_[s] * kI * (dkx_[i] * fluxx[s] + dky_[j] * fluxy[s]);
        }
        if (l == kLayers - 1) t += params_.rek * kappa2_[s] * psi[s];
        dq[s] = t;
      }
    }
  }
  return out;
}

void QgModel::step(ModelState& state) const {
  SpectralField t0 = tendency(state);
  const double dt = params_.dt;
  SpectralField next(state.qh.size());
  const auto& h = state.history;
  if (h.empty()) {
    for (size_t s = 0; s < next.size(); ++s) next[s] = state.qh[s] + dt * t0[s];
  } else if (h.size() == 1) {
    for (size_t s = 0; s < next.size(); ++s) next[s] = state.qh[s] + dt * (1.5 * t0[s] - 0.5 * h[0][s]);
  } else {
    const double c = dt / 12.0;
    for (size_t s = 0; s < next.size(); ++s)
      next[s] = state.qh[s] + c * (23.0 * t0[s] - 16.0 * h[0][s] + 5.0 * h[1][s]);
  }
  if (params_.filter) {
    const size_t ns = fft_.spectral_size();
    for (int l = 0; l < kLayers; ++l)
      for (size_t s = 0; s < ns; ++s) next[l * ns + s] *= filter_[s];
  }
  const double t_new = state.t + dt;
  check_finite(next, t_new, "step");
  state.qh = std::move(next);
  state.q = to_physical(state.qh);
  state.t = t_new;
  state.history.insert(state.history.begin(), std::move(t0));
  if (state.history.size() > 2) state.history.resize(2);
}

std::vector<ModelState> QgModel::run_free(ModelState state, long n_steps, long snapshot_every) const {
  if (n_steps < 0) throw ConfigError("run_free: n_steps must be >= 0");
  if (snapshot_every < 1) throw ConfigError("run_free: snapshot_every must be >= 1");
  std::vector<ModelState> out;
  out.push_back(state);
  out.back().history.clear();
  for (long k = 1; k <= n_steps; ++k) {
    step(state);
    if (k % snapshot_every == 0) {
      out.push_back(state);
      out.back().history.clear();
    }
  }
  return out;
}

double QgModel::energy(const ModelState& state) const {
  const size_t np = grid_.points();
  const std::vector<double> psi = to_physical(invert_pv(state.qh));
  const double w[kLayers] = {params_.delta / (1.0 + params_.delta), 1.0 / (1.0 + params_.delta)};
  double e = 0.0;
  for (int l = 0; l < kLayers; ++l) {
    double acc = 0.0;
    for (size_t p = 0; p < np; ++p) acc += psi[l * np + p] * state.q[l * np + p];
    e += -0.5 * w[l] * acc / np;
  }
  return e;
}

double QgModel::enstrophy(const ModelState& state) const {
  const size_t np = grid_.points();
  const double w[kLayers] = {params_.delta / (1.0 + params_.delta), 1.0 / (1.0 + params_.delta)};
  double z = 0.0;
  for (int l = 0; l < kLayers; ++l) {
    double acc = 0.0;
    for (size_t p = 0; p < np; ++p) acc += state.q[l * np + p] * state.q[l * np + p];
    z += 0.5 * w[l] * acc / np;
  }
  return z;
}

void QgModel::check_finite(const SpectralField& f, double t, const char* what) const {
  for (const Complex& c : f) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw NumericalError(std::string("numerical blowup (") + what + ") at model time " +
                               std::to_string(t) + " s",
                           t);
    }
  }
}

}  // namespace qgda::model
