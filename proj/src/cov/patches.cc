/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/cov/patches.h"

#include <cmath>
#include <numeric>
#include <string>

#include "qgda/error.h"
#include "qgda/model/spectral.h"

namespace qgda::cov {

PatchSet::PatchSet(const GridSpec& grid, int P, std::span<const int> centers)
    : grid_(grid), P_(P), centers_(centers.begin(), centers.end()), slot_(grid.points(), -1) {
  check_patch_size(grid, P);
  for (size_t k = 0; k < centers_.size(); ++k) {
    const int c = centers_[k];
    if (c < 0 || c >= grid.points()) throw ConfigError("patch center " + std::to_string(c) + " off the grid");
    slot_[c] = static_cast<int>(k);
  }
  data_.assign(centers_.size() * kPatchChannels * P * P, 0.0);
}

double* PatchSet::patch(int center) {
  return const_cast<double*>(std::as_const(*this).patch(center));
}

const double* PatchSet::patch(int center) const {
  if (center < 0 || center >= grid_.points() || slot_[center] < 0) {
    throw ConfigError("no covariance patch prepared for center " + std::to_string(center));
  }
  return &data_[static_cast<size_t>(slot_[center]) * kPatchChannels * P_ * P_];
}

PatchProvider PatchSet::provider() const {
  return [this](int center) { return patch(center); };
}

namespace {

constexpr int kChannelLayers[kPatchChannels][2] = {{0, 0}, {0, 1}, {1, 1}};

template <class T>
void fill_patch(const GridSpec& g, const EnsemblePerturbations& pert, int P, int center, T* out) {
  const int np = g.points(), h = P / 2;
  const int cx = center % g.n, cy = center / g.n;
  for (int ch = 0; ch < kPatchChannels; ++ch) {
    const int a = kChannelLayers[ch][0] * np + center;
    for (int py = 0; py < P; ++py)
      for (int px = 0; px < P; ++px) {
        const int b = kChannelLayers[ch][1] * np + g.index(cx + px - h, cy + py - h);
        out[(ch * P + py) * P + px] = static_cast<T>(pert.cov(a, b));
      }
  }
}

}  // namespace

PatchSet ensemble_patches(const GridSpec& grid, const EnsemblePerturbations& pert, int P,
                          std::span<const int> centers) {
  if (pert.members() < 2) throw ConfigError("covariance patches need at least 2 members");
  if (pert.state_size() != grid.state_size()) throw ConfigError("ensemble state size does not match the grid");
  PatchSet set(grid, P, centers);
  for (int c : set.centers()) fill_patch(grid, pert, P, c, set.patch(c));
  return set;
}

void extract_window(const GridSpec& g, std::span<const double> field, int center, int P, std::span<float> out) {
  const int np = g.points(), h = P / 2;
  const int cx = center % g.n, cy = center / g.n;
  for (int l = 0; l < kInputChannels; ++l)
    for (int py = 0; py < P; ++py)
      for (int px = 0; px < P; ++px)
        out[(l * P + py) * P + px] = static_cast<float>(field[l * np + g.index(cx + px - h, cy + py - h)]);
}

CovPatchSample PatchDataset::at(std::size_t i) const {
  CovPatchSample s;
  s.cycle = cycle[i];
  s.center = center[i];
  s.input.assign(input.begin() + i * input_size(), input.begin() + (i + 1) * input_size());
  s.output.assign(output.begin() + i * output_size(), output.begin() + (i + 1) * output_size());
  return s;
}

void PatchDataset::append(const CovPatchSample& s) {
  if (s.input.size() != input_size() || s.output.size() != output_size()) {
    throw ConfigError("patch sample shape does not match dataset patch side " + std::to_string(P));
  }
  cycle.push_back(s.cycle);
  center.push_back(s.center);
  input.insert(input.end(), s.input.begin(), s.input.end());
  output.insert(output.end(), s.output.begin(), s.output.end());
}

void extract_patch_samples(const GridSpec& grid, const EnsemblePerturbations& pert, std::uint64_t cycle,
                           PatchDataset& out) {
  std::vector<int> all(grid.points());
  std::iota(all.begin(), all.end(), 0);
  extract_patch_samples(grid, pert, cycle, all, out);
}

void extract_patch_samples(const GridSpec& grid, const EnsemblePerturbations& pert, std::uint64_t cycle,
                           std::span<const int> centers, PatchDataset& out) {
  check_patch_size(grid, out.P);
  if (pert.members() < 2) throw ConfigError("patch samples need at least 2 members");
  if (pert.state_size() != grid.state_size()) throw ConfigError("ensemble state size does not match the grid");
  const size_t count = centers.size();
  const size_t in_sz = out.input_size(), out_sz = out.output_size();
  const size_t base = out.size();
  out.cycle.resize(base + count, cycle);
  out.center.resize(base + count);
  out.input.resize((base + count) * in_sz);
  out.output.resize((base + count) * out_sz);
  for (size_t i = 0; i < count; ++i) {
    const int c = centers[i];
    if (c < 0 || c >= grid.points()) throw ConfigError("patch center " + std::to_string(c) + " is off the grid");
    out.center[base + i] = static_cast<std::uint32_t>(c);
    extract_window(grid, pert.mean(), c, out.P, std::span<float>(&out.input[(base + i) * in_sz], in_sz));
    fill_patch(grid, pert, out.P, c, &out.output[(base + i) * out_sz]);
  }
}

std::vector<double> ClimatologicalB::scaled() const {
  std::vector<double> s = templ;
  const size_t pp = static_cast<size_t>(P) * P;
  const double f[kPatchChannels] = {layer_scale[0], std::sqrt(layer_scale[0] * layer_scale[1]), layer_scale[1]};
  for (int ch = 0; ch < kPatchChannels; ++ch)
    for (size_t k = 0; k < pp; ++k) s[ch * pp + k] *= f[ch];
  return s;
}

ClimatologicalB climatological_b(const GridSpec& grid, std::span<const model::Snapshot> trajectory,
                                 double window_s, int P) {
  check_patch_size(grid, P);
  if (!(window_s > 0.0)) throw ConfigError("background window must be positive");
  if (trajectory.size() < 2) throw ConfigError("background estimate needs a trajectory of at least 2 snapshots");
  const double spacing = trajectory[1].t - trajectory[0].t;
  if (!(spacing > 0.0)) throw ConfigError("trajectory times must increase");
  for (size_t k = 0; k < trajectory.size(); ++k) {
    if (trajectory[k].n != grid.n || trajectory[k].q.size() != static_cast<size_t>(grid.state_size())) {
      throw ConfigError("trajectory snapshot " + std::to_string(k) + " does not match the grid");
    }
    if (k > 0 && std::fabs(trajectory[k].t - trajectory[k - 1].t - spacing) > 1e-6 * spacing) {
      throw ConfigError("trajectory snapshots are not uniformly spaced");
    }
  }
  const long lag = std::lround(window_s / spacing);
  if (lag < 1 || std::fabs(lag * spacing - window_s) > 1e-6 * window_s) {
    throw ConfigError("background window is not a multiple of the snapshot spacing");
  }
  if (static_cast<long>(trajectory.size()) <= lag) {
    throw ConfigError("trajectory of " + std::to_string(trajectory.size()) + " snapshots is too short for a " +
                      std::to_string(lag) + "-snapshot window");
  }

  // Center-averaged lagged products are circular cross-correlations, formed
  // spectrally: sum_c a(c) b(c+o) = inverse(conj(A) B)(o).
  const model::SpectralTransform fft(grid.n);
  const int np = grid.points(), ns = fft.spectral_size();
  std::vector<double> diff(2 * np), corr(np);
  std::vector<model::Complex> spec(2 * ns), prod(ns);
  std::vector<double> acc(kPatchChannels * np, 0.0);
  const long count = static_cast<long>(trajectory.size()) - lag;
  for (long k = 0; k < count; ++k) {
    const auto& x0 = trajectory[k].q;
    const auto& x1 = trajectory[k + lag].q;
    for (int i = 0; i < 2 * np; ++i) diff[i] = x1[i] - x0[i];
    for (int l = 0; l < 2; ++l)
      fft.forward(std::span<const double>(&diff[l * np], np), std::span<model::Complex>(&spec[l * ns], ns));
    for (int ch = 0; ch < kPatchChannels; ++ch) {
      const int a = kChannelLayers[ch][0], b = kChannelLayers[ch][1];
      for (int s = 0; s < ns; ++s) prod[s] = std::conj(spec[a * ns + s]) * spec[b * ns + s];
      fft.inverse(prod, corr);
      for (int i = 0; i < np; ++i) acc[ch * np + i] += corr[i];
    }
  }
  ClimatologicalB out;
  out.P = P;
  out.samples = static_cast<std::uint64_t>(count);
  out.templ.assign(static_cast<size_t>(kPatchChannels) * P * P, 0.0);
  const int h = P / 2;
  for (int ch = 0; ch < kPatchChannels; ++ch)
    for (int py = 0; py < P; ++py)
      for (int px = 0; px < P; ++px) {
        const int o = grid.index(px - h, py - h);
        out.templ[(ch * P + py) * P + px] = acc[ch * np + o] / (static_cast<double>(count) * np);
      }
  for (int ch : {0, 2}) {
    double& center = out.templ[(ch * P + h) * P + h];
    center = std::max(center, 0.0);
  }
  return out;
}

}  // namespace qgda::cov
