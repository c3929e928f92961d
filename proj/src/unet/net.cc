/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/unet/net.h"

#include <cmath>
#include <random>

#include "qgda/error.h"
#include "qgda/rng.h"
#include "qgda/unet/layers.h"

namespace qgda::unet {

void NetConfig::validate() const {
  if (in_channels < 1 || out_channels < 1) throw ConfigError("network channel counts must be positive");
  if (width < 1) throw ConfigError("network width must be >= 1");
  if (depth < 1 || depth > 6) throw ConfigError("network depth must lie in [1, 6]");
  if (kernel < 1) throw ConfigError("network kernel must be >= 1");
}

void NetConfig::check_input(int P) const {
  if (P < (1 << depth) || P % (1 << depth) != 0) {
    throw ConfigError("input side " + std::to_string(P) + " is not divisible by 2^depth = " +
                      std::to_string(1 << depth));
  }
}

std::vector<ParamBlock> parameter_layout(const NetConfig& cfg) {
  cfg.validate();
  std::vector<ParamBlock> blocks;
  std::size_t off = 0;
  auto add = [&](std::string name, std::size_t size) {
    blocks.push_back({std::move(name), off, size});
    off += size;
  };
  const std::size_t kk = static_cast<std::size_t>(cfg.kernel) * cfg.kernel;
  auto wd = [&](int k) { return static_cast<std::size_t>(cfg.width) << k; };
  for (int k = 0; k <= cfg.depth; ++k) {
    const std::size_t cin = k == 0 ? cfg.in_channels : wd(k - 1);
    const std::string p = "enc" + std::to_string(k);
    add(p + ".conv1.weight", wd(k) * cin * kk);
    add(p + ".conv1.bias", wd(k));
    add(p + ".conv2.weight", wd(k) * wd(k) * kk);
    add(p + ".conv2.bias", wd(k));
  }
  for (int k = cfg.depth - 1; k >= 0; --k) {
    const std::string p = "dec" + std::to_string(k);
    add(p + ".up.weight", wd(k + 1) * wd(k) * 4);
    add(p + ".up.bias", wd(k));
    add(p + ".conv1.weight", wd(k) * 2 * wd(k) * kk);
    add(p + ".conv1.bias", wd(k));
    add(p + ".conv2.weight", wd(k) * wd(k) * kk);
    add(p + ".conv2.bias", wd(k));
  }
  add("final.weight", static_cast<std::size_t>(cfg.out_channels) * wd(0));
  add("final.bias", cfg.out_channels);
  return blocks;
}

template <class T>
UNet<T>::UNet(const NetConfig& cfg) : cfg_(cfg), blocks_(parameter_layout(cfg)) {
  params_.assign(blocks_.back().offset + blocks_.back().size, T(0));
}

template <class T>
UNet<T>::~UNet() = default;
template <class T>
UNet<T>::UNet(const UNet&) = default;
template <class T>
UNet<T>& UNet<T>::operator=(const UNet&) = default;

template <class T>
void UNet<T>::init(std::uint64_t seed) {
  Rng rng = make_rng(seed, "unet-init");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (size_t i = 0; i < blocks_.size(); i += 2) {
    const ParamBlock& wb = blocks_[i];
    const ParamBlock& bb = blocks_[i + 1];
    // Inputs feeding one output; stride-2 up-convolution taps do not overlap.
    const bool up = wb.name.find(".up.") != std::string::npos;
    const std::size_t fan_in = up ? wb.size / (bb.size * 4) : wb.size / bb.size;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t j = 0; j < wb.size; ++j) params_[wb.offset + j] = static_cast<T>(bound * unif(rng));
    for (std::size_t j = 0; j < bb.size; ++j) params_[bb.offset + j] = T(0);
  }
}

namespace {

template <class T>
struct Pass {
  // Per encoder level: input, after conv1, after conv2; pooled maps.
  std::vector<Mat<T>> enc_in, enc_mid, enc_out;
  std::vector<std::vector<int>> argmax;
  // Per decoder level (indexed by level k): up-conv input, up-conv output,
  // concatenation, after conv1, after conv2.
  std::vector<Mat<T>> dec_in, dec_up, dec_cat, dec_mid, dec_out;
  Mat<T> out;
};

template <class T>
void run_forward(const NetConfig& cfg, const std::vector<ParamBlock>& blocks, const std::vector<T>& p,
                 Mat<T> x, int batch, int P, Pass<T>& f) {
  const int d = cfg.depth, K = cfg.kernel;
  auto ptr = [&](size_t i) { return p.data() + blocks[i].offset; };
  auto wd = [&](int k) { return cfg.width << k; };
  auto shape = [&](int k) { return Shape{batch, P >> k, P >> k}; };
  f.enc_in.resize(d + 1);
  f.enc_mid.resize(d + 1);
  f.enc_out.resize(d + 1);
  f.argmax.resize(d);
  f.dec_in.resize(d);
  f.dec_up.resize(d);
  f.dec_cat.resize(d);
  f.dec_mid.resize(d);
  f.dec_out.resize(d);
  size_t bi = 0;
  for (int k = 0; k <= d; ++k) {
    f.enc_in[k] = std::move(x);
    f.enc_mid[k] = conv_forward<T>(f.enc_in[k], shape(k), ptr(bi), ptr(bi + 1), wd(k), K, true);
    f.enc_out[k] = conv_forward<T>(f.enc_mid[k], shape(k), ptr(bi + 2), ptr(bi + 3), wd(k), K, true);
    bi += 4;
    if (k < d) x = maxpool_forward<T>(f.enc_out[k], shape(k), f.argmax[k]);
  }
  const Mat<T>* below = &f.enc_out[d];
  for (int k = d - 1; k >= 0; --k) {
    f.dec_in[k] = *below;
    f.dec_up[k] = upconv_forward<T>(f.dec_in[k], shape(k + 1), ptr(bi), ptr(bi + 1), wd(k));
    Mat<T>& cat = f.dec_cat[k];
    cat.resize(2 * wd(k), f.dec_up[k].cols());
    cat.topRows(wd(k)) = f.enc_out[k];
    cat.bottomRows(wd(k)) = f.dec_up[k];
    f.dec_mid[k] = conv_forward<T>(cat, shape(k), ptr(bi + 2), ptr(bi + 3), wd(k), K, true);
    f.dec_out[k] = conv_forward<T>(f.dec_mid[k], shape(k), ptr(bi + 4), ptr(bi + 5), wd(k), K, true);
    bi += 6;
    below = &f.dec_out[k];
  }
  f.out = conv_forward<T>(*below, shape(0), ptr(bi), ptr(bi + 1), cfg.out_channels, 1, false);
}

}  // namespace

template <class T>
void UNet<T>::forward(std::span<const T> input, int batch, int P, std::span<T> output) const {
  cfg_.check_input(P);
  const std::size_t pp = static_cast<std::size_t>(P) * P;
  if (input.size() != batch * cfg_.in_channels * pp || output.size() != batch * cfg_.out_channels * pp) {
    throw ConfigError("network input/output buffers do not match batch " + std::to_string(batch) + " x P " +
                      std::to_string(P));
  }
  Pass<T> f;
  run_forward(cfg_, blocks_, params_, to_channel_major<T>(input.data(), batch, cfg_.in_channels, P, P), batch, P, f);
  from_channel_major<T>(f.out, batch, P, P, output.data());
}

template <class T>
T UNet<T>::loss_and_grad(std::span<const T> input, std::span<const T> target, int batch, int P,
                         std::vector<T>& grad) const {
  cfg_.check_input(P);
  const std::size_t pp = static_cast<std::size_t>(P) * P;
  if (input.size() != batch * cfg_.in_channels * pp || target.size() != batch * cfg_.out_channels * pp) {
    throw ConfigError("network training buffers do not match batch " + std::to_string(batch) + " x P " +
                      std::to_string(P));
  }
  const int d = cfg_.depth, K = cfg_.kernel;
  Pass<T> f;
  run_forward(cfg_, blocks_, params_, to_channel_major<T>(input.data(), batch, cfg_.in_channels, P, P), batch, P, f);
  const Mat<T> tgt = to_channel_major<T>(target.data(), batch, cfg_.out_channels, P, P);
  const Mat<T> resid = f.out - tgt;
  const double count = static_cast<double>(resid.size());
  const T mse = static_cast<T>(resid.array().square().template cast<double>().sum() / count);
  if (!std::isfinite(static_cast<double>(mse))) throw NumericalError("non-finite network loss");

  grad.assign(params_.size(), T(0));
  auto ptr = [&](size_t i) { return params_.data() + blocks_[i].offset; };
  auto gptr = [&](size_t i) { return grad.data() + blocks_[i].offset; };
  auto wd = [&](int k) { return cfg_.width << k; };
  auto shape = [&](int k) { return Shape{batch, P >> k, P >> k}; };

  size_t bi = blocks_.size() - 2;
  const Mat<T> d_out = resid * static_cast<T>(2.0 / count);
  Mat<T> d_x;
  const Mat<T>& last = d > 0 ? f.dec_out[0] : f.enc_out[0];
  conv_backward<T>(last, shape(0), ptr(bi), cfg_.out_channels, 1, f.out, false, d_out, gptr(bi), gptr(bi + 1), &d_x);

  std::vector<Mat<T>> d_skip(d);
  for (int k = 0; k < d; ++k) {
    bi -= 6;
    Mat<T> d_mid, d_cat, d_in;
    conv_backward<T>(f.dec_mid[k], shape(k), ptr(bi + 4), wd(k), K, f.dec_out[k], true, d_x, gptr(bi + 4),
                     gptr(bi + 5), &d_mid);
    conv_backward<T>(f.dec_cat[k], shape(k), ptr(bi + 2), wd(k), K, f.dec_mid[k], true, d_mid, gptr(bi + 2),
                     gptr(bi + 3), &d_cat);
    d_skip[k] = d_cat.topRows(wd(k));
    const Mat<T> d_up = d_cat.bottomRows(wd(k));
    upconv_backward<T>(f.dec_in[k], shape(k + 1), ptr(bi), wd(k), d_up, gptr(bi), gptr(bi + 1), d_in);
    d_x = std::move(d_in);
  }
  // d_x now holds the gradient at the bottleneck output.
  for (int k = d; k >= 0; --k) {
    bi -= 4;
    if (k < d) {
      Mat<T> d_pool = maxpool_backward<T>(d_x, shape(k), f.argmax[k]);
      d_x = d_pool + d_skip[k];
    }
    Mat<T> d_mid, d_in;
    conv_backward<T>(f.enc_mid[k], shape(k), ptr(bi + 2), wd(k), K, f.enc_out[k], true, d_x, gptr(bi + 2),
                     gptr(bi + 3), &d_mid);
    conv_backward<T>(f.enc_in[k], shape(k), ptr(bi), wd(k), K, f.enc_mid[k], true, d_mid, gptr(bi), gptr(bi + 1),
                     k > 0 ? &d_in : nullptr);
    d_x = std::move(d_in);
  }
  return mse;
}

template <class T>
void Adam<T>::step(std::vector<T>& params, const std::vector<T>& grad, double lr) {
  if (grad.size() != params.size()) throw ConfigError("gradient size does not match parameters");
  if (m.size() != params.size()) {
    m.assign(params.size(), T(0));
    v.assign(params.size(), T(0));
  }
  ++step_count;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    const double mi = beta1 * m[i] + (1.0 - beta1) * g;
    const double vi = beta2 * v[i] + (1.0 - beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    params[i] = static_cast<T>(params[i] - lr * (mi / c1) / (std::sqrt(vi / c2) + eps));
  }
}

template class UNet<float>;
template class UNet<double>;
template struct Adam<float>;
template struct Adam<double>;

}  // namespace qgda::unet
