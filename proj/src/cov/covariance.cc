/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/cov/covariance.h"

#include <algorithm>
#include <string>

#include "qgda/error.h"

namespace qgda::cov {

std::vector<double> ensemble_mean(std::span<const std::vector<double>> members) {
  if (members.empty()) throw ConfigError("ensemble has no members");
  const size_t size = members[0].size();
  std::vector<double> shift(size, 0.0);
  for (const auto& m : members) {
    if (m.size() != size) throw ConfigError("ensemble members differ in size");
    for (size_t a = 0; a < size; ++a) shift[a] += m[a] - members[0][a];
  }
  std::vector<double> mean(size);
  for (size_t a = 0; a < size; ++a) mean[a] = members[0][a] + shift[a] / static_cast<double>(members.size());
  return mean;
}

EnsemblePerturbations::EnsemblePerturbations(std::span<const std::vector<double>> members)
    : n_members_(static_cast<int>(members.size())) {
  if (members.empty()) throw ConfigError("ensemble has no members");
  state_size_ = static_cast<int>(members[0].size());
  for (const auto& m : members)
    if (static_cast<int>(m.size()) != state_size_) throw ConfigError("ensemble members differ in size");
  mean_ = ensemble_mean(members);
  x_.resize(static_cast<size_t>(state_size_) * n_members_);
  for (int a = 0; a < state_size_; ++a)
    for (int i = 0; i < n_members_; ++i) x_[static_cast<size_t>(a) * n_members_ + i] = members[i][a] - mean_[a];
}

bool EnsemblePerturbations::collapsed() const {
  return std::all_of(x_.begin(), x_.end(), [](double v) { return v == 0.0; });
}

void check_patch_size(const GridSpec& grid, int P) {
  if (P < 2 || P % 2 != 0) throw ConfigError("patch side must be even and >= 2, got " + std::to_string(P));
  if (P > grid.n) {
    throw ConfigError("patch side " + std::to_string(P) + " exceeds grid size " + std::to_string(grid.n));
  }
}

EnsembleCovariance::EnsembleCovariance(const GridSpec& grid, const EnsemblePerturbations& pert)
    : grid_(grid), pert_(pert) {
  if (pert.state_size() != grid.state_size()) throw ConfigError("ensemble state size does not match the grid");
}

void EnsembleCovariance::column(int s, std::span<double> out) const {
  for (int x = 0; x < grid_.state_size(); ++x) out[x] = pert_.cov(x, s);
}

PatchCovariance::PatchCovariance(const GridSpec& grid, int P, PatchProvider provider)
    : grid_(grid), P_(P), provider_(std::move(provider)) {
  check_patch_size(grid, P);
}

namespace {

inline int point_offset_slot(const GridSpec& g, int P, int from, int to) {
  return patch_slot(P, g.offset(from % g.n, to % g.n), g.offset(from / g.n, to / g.n));
}

// Visits every gridpoint within the patch reach of a center, each once.
template <class F>
void for_patch_neighborhood(const GridSpec& g, int P, int center, F&& f) {
  if (P >= g.n) {
    for (int p = 0; p < g.points(); ++p) f(p);
    return;
  }
  const int cx = center % g.n, cy = center / g.n, h = P / 2;
  for (int oy = -h; oy <= h; ++oy)
    for (int ox = -h; ox <= h; ++ox) f(g.index(cx + ox, cy + oy));
}

}  // namespace

double PatchCovariance::channel_at(int center, int channel, int to) const {
  const int slot = point_offset_slot(grid_, P_, center, to);
  if (slot < 0) return 0.0;
  return provider_(center)[channel * P_ * P_ + slot];
}

void PatchCovariance::column(int s, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int np = grid_.points();
  const int ls = s / np, ps = s % np;
  const double* own = provider_(ps);
  const int pp = P_ * P_;
  for_patch_neighborhood(grid_, P_, ps, [&](int px) {
    const int slot = point_offset_slot(grid_, P_, ps, px);
    if (ls == 0) {
      if (slot >= 0) {
        out[px] = own[slot];
        out[np + px] = own[pp + slot];
      }
    } else {
      if (slot >= 0) out[np + px] = own[2 * pp + slot];
      out[px] = channel_at(px, 1, ps);
    }
  });
}

double PatchCovariance::entry(int a, int b) const {
  const int np = grid_.points();
  const int la = a / np, pa = a % np, lb = b / np, pb = b % np;
  if (la != lb) return la == 0 ? channel_at(pa, 1, pb) : channel_at(pb, 1, pa);
  const int ch = la == 0 ? 0 : 2;
  const int sa = point_offset_slot(grid_, P_, pa, pb);
  const int sb = point_offset_slot(grid_, P_, pb, pa);
  const int pp = P_ * P_;
  if (sa >= 0 && sb >= 0) return 0.5 * (provider_(pa)[ch * pp + sa] + provider_(pb)[ch * pp + sb]);
  if (sa >= 0) return provider_(pa)[ch * pp + sa];
  if (sb >= 0) return provider_(pb)[ch * pp + sb];
  return 0.0;
}

GainTerms assemble_gain_terms(const CovarianceSource& source, const LinearObsOperator& h,
                              const Localizer& localizer) {
  const GridSpec& g = source.grid();
  if (!(localizer.grid() == g)) throw ConfigError("localizer grid does not match the covariance grid");
  if (h.state_size() != g.state_size()) throw ConfigError("observation operator does not match the grid");
  const int S = g.state_size(), np = g.points(), m = h.size();
  GainTerms out{Eigen::MatrixXd::Zero(S, m), Eigen::MatrixXd::Zero(m, m)};
  std::vector<double> col(S);
  std::vector<double> wrow(np);
  for (int o = 0; o < m; ++o) {
    for (const ObsTerm& term : h.row(o)) {
      source.column(term.index, col);
      const int ps = term.index % np;
      for (int px = 0; px < np; ++px) wrow[px] = localizer(px, ps);
      double* dst = out.bht.col(o).data();
      for (int l = 0; l < model::kLayers; ++l)
        for (int px = 0; px < np; ++px) dst[l * np + px] += term.weight * wrow[px] * col[l * np + px];
    }
  }
  Eigen::MatrixXd raw(m, m);
  for (int o1 = 0; o1 < m; ++o1) {
    for (int o2 = 0; o2 < m; ++o2) {
      double acc = 0.0;
      for (const ObsTerm& s : h.row(o1))
        for (const ObsTerm& t : h.row(o2))
          acc += s.weight * t.weight * localizer(s.index % np, t.index % np) * source.entry(s.index, t.index);
      raw(o1, o2) = acc;
    }
  }
  out.hbht = 0.5 * (raw + raw.transpose());
  for (int o = 0; o < m; ++o) out.hbht(o, o) = std::max(0.0, out.hbht(o, o));
  return out;
}

GainTerms ensemble_cov_terms(const GridSpec& grid, const EnsemblePerturbations& pert, const LinearObsOperator& h,
                             const Localizer& localizer) {
  if (pert.members() < 2) {
    throw ConfigError("ensemble covariance needs at least 2 members, got " + std::to_string(pert.members()));
  }
  return assemble_gain_terms(EnsembleCovariance(grid, pert), h, localizer);
}

GainTerms patches_to_gain_terms(const GridSpec& grid, int P, const PatchProvider& provider,
                                const LinearObsOperator& h, const Localizer& localizer) {
  return assemble_gain_terms(PatchCovariance(grid, P, provider), h, localizer);
}

std::vector<int> required_patch_centers(const GridSpec& grid, int P, const LinearObsOperator& h) {
  check_patch_size(grid, P);
  const int np = grid.points();
  std::vector<char> need(np, 0);
  for (int o = 0; o < h.size(); ++o) {
    for (const ObsTerm& t : h.row(o)) {
      need[t.index % np] = 1;
      if (t.index >= np) for_patch_neighborhood(grid, P, t.index % np, [&](int p) { need[p] = 1; });
    }
  }
  std::vector<int> centers;
  for (int p = 0; p < np; ++p)
    if (need[p]) centers.push_back(p);
  return centers;
}

}  // namespace qgda::cov
