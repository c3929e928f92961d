/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "qgda/error.h"
#include "qgda/rng.h"
#include "qgda/unet/train.h"

namespace qgda::unet {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ConfigError("train fraction must be in (0, 1]");
  if (patience < 0) throw ConfigError("patience must be >= 0");
}

namespace {

// Standardized float copies of the selected samples, packed for a batch.
struct Batcher {
  const cov::PatchDataset& data;
  const Standardization& st;
  int pp;

  void gather(std::span<const std::size_t> idx, std::vector<float>& in, std::vector<float>& out) const {
    const std::size_t isz = data.input_size(), osz = data.output_size();
    in.resize(idx.size() * isz);
    out.resize(idx.size() * osz);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      const float* si = &data.input[idx[b] * isz];
      const float* so = &data.output[idx[b] * osz];
      for (int c = 0; c < cov::kInputChannels; ++c) {
        const double m = st.in_mean[c], inv = 1.0 / st.in_std[c];
        for (int k = 0; k < pp; ++k) {
          in[b * isz + c * pp + k] = static_cast<float>((si[c * pp + k] - m) * inv);
        }
      }
      for (int c = 0; c < cov::kPatchChannels; ++c) {
        const double m = st.out_mean[c], inv = 1.0 / st.out_std[c];
        for (int k = 0; k < pp; ++k) {
          out[b * osz + c * pp + k] = static_cast<float>((so[c * pp + k] - m) * inv);
        }
      }
    }
  }
};

double rmse_on(const UNet<float>& net, const Batcher& batcher, std::span<const std::size_t> samples, int batch) {
  std::vector<float> in, target, pred;
  double sse = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < samples.size(); s += batch) {
    const auto idx = samples.subspan(s, std::min<std::size_t>(batch, samples.size() - s));
    batcher.gather(idx, in, target);
    pred.resize(target.size());
    net.forward(in, static_cast<int>(idx.size()), batcher.data.P, pred);
    for (std::size_t k = 0; k < pred.size(); ++k) {
      const double e = static_cast<double>(pred[k]) - target[k];
      sse += e * e;
    }
    count += pred.size();
  }
  return std::sqrt(sse / static_cast<double>(count));
}

}  // namespace

TrainResult train(const cov::PatchDataset& data, const NetConfig& net_cfg, const TrainConfig& cfg, int grid_n,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  net_cfg.validate();
  net_cfg.check_input(data.P);
  if (data.size() == 0) throw ConfigError("training dataset is empty");
  if (net_cfg.in_channels != cov::kInputChannels || net_cfg.out_channels != cov::kPatchChannels) {
    throw ConfigError("network must map 2 input channels to 3 output channels");
  }

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto split_rng = make_rng(cfg.seed, "train-split");
  std::shuffle(order.begin(), order.end(), split_rng);
  std::size_t n_train = static_cast<std::size_t>(std::floor(cfg.train_fraction * data.size()));
  n_train = std::clamp<std::size_t>(n_train, 1, data.size());
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> val_idx(order.begin() + n_train, order.end());
  if (val_idx.empty()) val_idx = train_idx;

  TrainResult result;
  result.best.net = net_cfg;
  result.best.patch = data.P;
  result.best.grid_n = grid_n;
  result.best.stats = compute_standardization(data, train_idx);

  UNet<float> net(net_cfg);
  net.init(derive_seed(cfg.seed, "weights"));
  Adam<float> adam;
  const Batcher batcher{data, result.best.stats, data.P * data.P};

  result.best_val_rmse = std::numeric_limits<double>::infinity();
  std::vector<float> in, target, grad;
  int since_best = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto rng = make_rng(cfg.seed, "epoch", static_cast<std::uint64_t>(epoch));
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < train_idx.size(); s += cfg.batch_size) {
      const auto idx = std::span<const std::size_t>(train_idx).subspan(
          s, std::min<std::size_t>(cfg.batch_size, train_idx.size() - s));
      batcher.gather(idx, in, target);
      const float mse = net.loss_and_grad(in, target, static_cast<int>(idx.size()), data.P, grad);
      adam.step(net.params(), grad, cfg.learning_rate);
      ++result.steps;
      sse += static_cast<double>(mse) * target.size();
      count += target.size();
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_rmse = std::sqrt(sse / static_cast<double>(count));
    rec.val_rmse = rmse_on(net, batcher, val_idx, std::max(cfg.batch_size, 64));
    if (!std::isfinite(rec.val_rmse)) throw NumericalError("validation loss is not finite at epoch " + std::to_string(epoch));
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.val_rmse < result.best_val_rmse) {
      result.best_val_rmse = rec.val_rmse;
      result.best_epoch = epoch;
      result.best.params = net.params();
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

double evaluate_rmse(const Checkpoint& ckpt, const cov::PatchDataset& data, std::span<const std::size_t> samples) {
  if (data.P != ckpt.patch) throw ConfigError("dataset patch side differs from the checkpoint's");
  UNet<float> net(ckpt.net);
  net.params() = ckpt.params;
  const Batcher batcher{data, ckpt.stats, data.P * data.P};
  return rmse_on(net, batcher, samples, 64);
}

}  // namespace qgda::unet
