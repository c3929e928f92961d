/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/model/regrid.h"

#include <array>
#include <cmath>
#include <string>

#include "qgda/error.h"
#include "qgda/model/spectral.h"

namespace qgda::model {

RegridMethod parse_regrid_method(std::string_view name) {
  if (name == "bilinear") return RegridMethod::Bilinear;
  if (name == "area") return RegridMethod::AreaWeighted;
  if (name == "cubic") return RegridMethod::Cubic;
  throw ConfigError("unknown regrid method '" + std::string(name) + "' (bilinear, area, cubic)");
}

std::string_view to_string(RegridMethod method) {
  switch (method) {
    case RegridMethod::Bilinear: return "bilinear";
    case RegridMethod::AreaWeighted: return "area";
    case RegridMethod::Cubic: return "cubic";
  }
  return "?";
}

namespace {

void check_domains(const GridSpec& from, const GridSpec& to) {
  if (std::fabs(from.length - to.length) > 1e-9 * from.length) {
    throw ConfigError("regrid: domain lengths differ (" + std::to_string(from.length) + " vs " +
                      std::to_string(to.length) + ")");
  }
}

// Splits a coordinate into a base index and fractional offset in grid units.
inline void locate(const GridSpec& g, double x, int& i0, double& frac) {
  const double u = x / g.dx();
  const double fl = std::floor(u);
  frac = u - fl;
  i0 = g.wrap(static_cast<int>(static_cast<long long>(fl) % g.n));
}

std::array<double, 4> catmull_rom(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t),
          0.5 * (t3 - t2)};
}

// 1D weights of fine nodes covering one coarse cell centered on a node.
std::vector<double> area_weights(int ratio) {
  std::vector<double> w;
  if (ratio % 2 == 0) {
    w.assign(ratio + 1, 1.0);
    w.front() = w.back() = 0.5;
  } else {
    w.assign(ratio, 1.0);
  }
  for (double& v : w) v /= ratio;
  return w;
}

}  // namespace

BilinearStencil bilinear_stencil(const GridSpec& g, double x, double y) {
  int i0, j0;
  double fx, fy;
  locate(g, x, i0, fx);
  locate(g, y, j0, fy);
  const int i1 = g.wrap(i0 + 1), j1 = g.wrap(j0 + 1);
  const int n = g.n;
  return {{j0 * n + i0, j0 * n + i1, j1 * n + i0, j1 * n + i1},
          {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
}

double sample_bilinear(std::span<const double> layer, const GridSpec& g, double x, double y) {
  const BilinearStencil st = bilinear_stencil(g, x, y);
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += st.weight[k] * layer[st.point[k]];
  return acc;
}

double sample_cubic(std::span<const double> layer, const GridSpec& g, double x, double y) {
  int i0, j0;
  double fx, fy;
  locate(g, x, i0, fx);
  locate(g, y, j0, fy);
  const auto wx = catmull_rom(fx);
  const auto wy = catmull_rom(fy);
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    const int j = g.wrap(j0 - 1 + b);
    double row = 0.0;
    for (int a = 0; a < 4; ++a) row += wx[a] * layer[j * g.n + g.wrap(i0 - 1 + a)];
    acc += wy[b] * row;
  }
  return acc;
}

std::vector<double> regrid(std::span<const double> field, int layers, const GridSpec& from,
                           const GridSpec& to, RegridMethod method) {
  check_domains(from, to);
  const size_t npf = from.points(), npt = to.points();
  if (field.size() != npf * layers) throw ConfigError("regrid: field size does not match source grid");
  std::vector<double> out(npt * layers);
  if (from.n == to.n) {
    std::copy(field.begin(), field.end(), out.begin());
    return out;
  }
  if (method == RegridMethod::AreaWeighted) {
    if (to.n > from.n || from.n % to.n != 0) {
      throw ConfigError("regrid: area weighting needs downscaling by an integer ratio");
    }
    const int r = from.n / to.n;
    const auto w = area_weights(r);
    const int half = static_cast<int>(w.size()) / 2;
    for (int l = 0; l < layers; ++l) {
      auto src = field.subspan(l * npf, npf);
      for (int J = 0; J < to.n; ++J) {
        for (int I = 0; I < to.n; ++I) {
          double acc = 0.0;
          for (size_t b = 0; b < w.size(); ++b) {
            const int j = from.wrap(J * r - half + static_cast<int>(b));
            for (size_t a = 0; a < w.size(); ++a) {
              acc += w[a] * w[b] * src[j * from.n + from.wrap(I * r - half + static_cast<int>(a))];
            }
          }
          out[l * npt + J * to.n + I] = acc;
        }
      }
    }
    return out;
  }
  const double dxt = to.dx();
  for (int l = 0; l < layers; ++l) {
    auto src = field.subspan(l * npf, npf);
    for (int J = 0; J < to.n; ++J) {
      for (int I = 0; I < to.n; ++I) {
        const double x = I * dxt, y = J * dxt;
        out[l * npt + J * to.n + I] = method == RegridMethod::Cubic ? sample_cubic(src, from, x, y)
                                                                    : sample_bilinear(src, from, x, y);
      }
    }
  }
  return out;
}

std::vector<double> spectral_resample(std::span<const double> field, int layers, const GridSpec& from,
                                      const GridSpec& to) {
  check_domains(from, to);
  const size_t npf = from.points(), npt = to.points();
  if (field.size() != npf * layers) throw ConfigError("spectral_resample: field size mismatch");
  SpectralTransform ff(from.n), ft(to.n);
  const int keep = std::min(from.n, to.n) / 2;  // strictly below the smaller Nyquist
  const double scale = static_cast<double>(npt) / static_cast<double>(npf);
  std::vector<double> out(npt * layers);
  std::vector<Complex> sf(ff.spectral_size()), st(ft.spectral_size());
  for (int l = 0; l < layers; ++l) {
    ff.forward(field.subspan(l * npf, npf), sf);
    std::fill(st.begin(), st.end(), Complex{});
    for (int ky = -keep + 1; ky < keep; ++ky) {
      const int jf = ky < 0 ? ky + from.n : ky;
      const int jt = ky < 0 ? ky + to.n : ky;
      for (int kx = 0; kx < keep; ++kx) st[jt * ft.nk() + kx] = scale * sf[jf * ff.nk() + kx];
    }
    ft.inverse(st, std::span(out).subspan(l * npt, npt));
  }
  return out;
}

}  // namespace qgda::model
