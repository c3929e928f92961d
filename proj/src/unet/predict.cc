/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <algorithm>
#include <cmath>
#include <string>

#include "qgda/error.h"
#include "qgda/unet/predict.h"

namespace qgda::unet {

namespace {
constexpr int kInferenceBatch = 128;
}

UNetPredictor::UNetPredictor(Checkpoint ckpt) : ckpt_(std::move(ckpt)), net_(ckpt_.net) {
  ckpt_.net.check_input(ckpt_.patch);
  if (ckpt_.params.size() != net_.params().size()) {
    throw ConfigError("checkpoint parameters do not match its architecture");
  }
  net_.params() = ckpt_.params;
}

void UNetPredictor::predict_windows(std::span<const float> windows, int count, std::span<float> patches) const {
  const int P = ckpt_.patch, pp = P * P;
  const std::size_t isz = static_cast<std::size_t>(cov::kInputChannels) * pp;
  const std::size_t osz = static_cast<std::size_t>(cov::kPatchChannels) * pp;
  if (windows.size() != count * isz || patches.size() != count * osz) {
    throw ConfigError("window/patch buffer sizes do not match the checkpoint patch side");
  }
  const auto& st = ckpt_.stats;
  std::vector<float> in;
  for (int s = 0; s < count; s += kInferenceBatch) {
    const int b = std::min(kInferenceBatch, count - s);
    in.assign(windows.begin() + s * isz, windows.begin() + (s + b) * isz);
    for (int i = 0; i < b; ++i)
      for (int c = 0; c < cov::kInputChannels; ++c) {
        float* p = &in[i * isz + c * pp];
        const double m = st.in_mean[c], inv = 1.0 / st.in_std[c];
        for (int k = 0; k < pp; ++k) p[k] = static_cast<float>((p[k] - m) * inv);
      }
    auto out = patches.subspan(s * osz, b * osz);
    net_.forward(in, b, P, out);
    for (int i = 0; i < b; ++i)
      for (int c = 0; c < cov::kPatchChannels; ++c) {
        float* p = &out[i * osz + c * pp];
        for (int k = 0; k < pp; ++k) p[k] = static_cast<float>(p[k] * st.out_std[c] + st.out_mean[c]);
      }
  }
}

cov::PatchSet UNetPredictor::predict_patches(const model::GridSpec& grid, std::span<const double> field,
                                             std::span<const int> centers) const {
  if (grid.n != ckpt_.grid_n) {
    throw ConfigError("network was trained on a " + std::to_string(ckpt_.grid_n) + "-point grid, asked for " +
                      std::to_string(grid.n) + "; use transfer mode");
  }
  cov::check_patch_size(grid, ckpt_.patch);
  const int P = ckpt_.patch;
  const std::size_t isz = static_cast<std::size_t>(cov::kInputChannels) * P * P;
  const std::size_t osz = static_cast<std::size_t>(cov::kPatchChannels) * P * P;
  const int count = static_cast<int>(centers.size());
  std::vector<float> windows(count * isz), out(count * osz);
  for (int i = 0; i < count; ++i) {
    cov::extract_window(grid, field, centers[i], P, std::span<float>(&windows[i * isz], isz));
  }
  predict_windows(windows, count, out);
  cov::PatchSet set(grid, P, centers);
  for (int i = 0; i < count; ++i) std::copy_n(&out[i * osz], osz, set.patch(centers[i]));
  return set;
}

cov::PatchSet UNetPredictor::predict(const model::GridSpec& grid, const cov::EnsemblePerturbations& forecast,
                                     std::span<const int> centers) const {
  return predict_patches(grid, forecast.mean(), centers);
}

TransferPredictor::TransferPredictor(Checkpoint coarse, const model::GridSpec& fine_grid, model::RegridMethod method)
    : native_(std::move(coarse)),
      fine_(fine_grid),
      coarse_(model::GridSpec::create(native_.checkpoint().grid_n, fine_grid.length)),
      method_(method) {
  if (fine_.n < coarse_.n || fine_.n % coarse_.n != 0) {
    throw ConfigError("transfer needs a fine grid that refines the training grid by an integer factor");
  }
  ratio_ = fine_.n / coarse_.n;
  fine_patch_ = native_.patch_side() * ratio_;
  cov::check_patch_size(fine_, fine_patch_);
}

std::vector<double> TransferPredictor::coarse_inputs(std::span<const double> fine_field) const {
  return model::regrid(fine_field, model::kLayers, fine_, coarse_, method_);
}

cov::PatchSet TransferPredictor::predict_patches(std::span<const double> fine_field,
                                                 std::span<const int> fine_centers) const {
  const auto coarse_field = coarse_inputs(fine_field);
  auto nearest = [&](int f) {
    const int cx = static_cast<int>(std::lround(static_cast<double>(f % fine_.n) / ratio_));
    const int cy = static_cast<int>(std::lround(static_cast<double>(f / fine_.n) / ratio_));
    return coarse_.index(cx, cy);
  };
  std::vector<int> coarse_centers;
  coarse_centers.reserve(fine_centers.size());
  for (int f : fine_centers) coarse_centers.push_back(nearest(f));
  std::sort(coarse_centers.begin(), coarse_centers.end());
  coarse_centers.erase(std::unique(coarse_centers.begin(), coarse_centers.end()), coarse_centers.end());
  const auto coarse = native_.predict_patches(coarse_, coarse_field, coarse_centers);

  const int Pc = native_.patch_side(), hc = Pc / 2, Pf = fine_patch_, hf = Pf / 2;
  // Per fine offset along one axis: lower coarse index and weight of the upper neighbour.
  std::vector<int> lo(Pf);
  std::vector<double> frac(Pf);
  for (int k = 0; k < Pf; ++k) {
    const double u = static_cast<double>(k - hf) / ratio_;
    lo[k] = static_cast<int>(std::floor(u));
    frac[k] = u - lo[k];
  }
  cov::PatchSet out(fine_, Pf, fine_centers);
  for (int f : fine_centers) {
    const double* src = coarse.patch(nearest(f));
    double* dst = out.patch(f);
    for (int ch = 0; ch < cov::kPatchChannels; ++ch) {
      const double* s = src + static_cast<std::size_t>(ch) * Pc * Pc;
      auto at = [&](int ox, int oy) {
        const int ix = ox + hc, iy = oy + hc;
        return ix < 0 || iy < 0 || ix >= Pc || iy >= Pc ? 0.0 : s[iy * Pc + ix];
      };
      for (int py = 0; py < Pf; ++py)
        for (int px = 0; px < Pf; ++px) {
          const int x0 = lo[px], y0 = lo[py];
          const double fx = frac[px], fy = frac[py];
          const double v = (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x0 + 1, y0) +
                           (1 - fx) * fy * at(x0, y0 + 1) + fx * fy * at(x0 + 1, y0 + 1);
          dst[static_cast<std::size_t>(ch) * Pf * Pf + py * Pf + px] = v;
        }
    }
  }
  return out;
}

cov::PatchSet TransferPredictor::predict(const model::GridSpec& grid, const cov::EnsemblePerturbations& forecast,
                                         std::span<const int> centers) const {
  if (!(grid == fine_)) throw ConfigError("transfer predictor was built for a different grid");
  return predict_patches(forecast.mean(), centers);
}

}  // namespace qgda::unet
