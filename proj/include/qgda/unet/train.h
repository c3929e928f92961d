/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qgda/cov/patches.h"
#include "qgda/unet/checkpoint.h"

namespace qgda::unet {

struct TrainConfig {
  double learning_rate = 0.002;
  int epochs = 200;
  int batch_size = 64;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  /// Stop after this many epochs without a new validation minimum (0: never).
  int patience = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_rmse = 0.0;  ///< standardized units, averaged over the epoch's minibatches
  double val_rmse = 0.0;    ///< standardized units, after the epoch
};

struct TrainResult {
  Checkpoint best;
  int best_epoch = -1;
  double best_val_rmse = 0.0;
  long steps = 0;
  std::vector<EpochRecord> history;
};

/// Seeded 80/20 split (a single sample serves as both sets), minibatch Adam on
/// the mean squared error, parameters kept from the epoch of lowest validation RMSE.
TrainResult train(const cov::PatchDataset& data, const NetConfig& net, const TrainConfig& cfg, int grid_n,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Standardized RMSE of a checkpoint on the given samples.
double evaluate_rmse(const Checkpoint& ckpt, const cov::PatchDataset& data, std::span<const std::size_t> samples);

}  // namespace qgda::unet
