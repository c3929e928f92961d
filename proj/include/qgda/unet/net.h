/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qgda::unet {

struct NetConfig {
  int in_channels = 2;
  int out_channels = 3;
  int width = 32;   ///< features after the first convolution
  int depth = 2;    ///< downsampling steps
  int kernel = 2;

  void validate() const;
  /// Throws unless P is divisible by 2^depth.
  void check_input(int P) const;
  bool operator==(const NetConfig&) const = default;
};

/// One named parameter tensor inside the flat parameter vector.
struct ParamBlock {
  std::string name;
  std::size_t offset;
  std::size_t size;
};

/// Layer order of the flat parameter vector: for each encoder level a double
/// convolution (weights then bias, twice); for each decoder level from the
/// deepest up an up-convolution then a double convolution; finally the 1x1
/// convolution. Convolution weights are [out][in][ky][kx]; up-convolution
/// weights are [in][out][ky][kx].
std::vector<ParamBlock> parameter_layout(const NetConfig& cfg);

/// Encoder-decoder network with skip connections. Convolutions are "same"
/// padded (kernel/2 zeros before, the rest after: 1 at the top/left for 2x2)
/// and followed by ReLU; pooling is 2x2 max with stride 2; up-convolutions are
/// 2x2 transposed convolutions with stride 2 and no activation; the final 1x1
/// convolution is linear.
///
/// Batches are sample-major [b][c][y][x].
template <class T>
class UNet {
 public:
  explicit UNet(const NetConfig& cfg);
  ~UNet();
  UNet(const UNet&);
  UNet& operator=(const UNet&);

  const NetConfig& config() const { return cfg_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::vector<T>& params() { return params_; }
  const std::vector<T>& params() const { return params_; }

  /// Fan-in scaled uniform weights in +-1/sqrt(fan_in), zero biases.
  void init(std::uint64_t seed);

  void forward(std::span<const T> input, int batch, int P, std::span<T> output) const;

  /// Mean squared error over all outputs and its exact gradient with respect
  /// to every parameter (written into grad, resized to match).
  T loss_and_grad(std::span<const T> input, std::span<const T> target, int batch, int P,
                  std::vector<T>& grad) const;

 private:
  NetConfig cfg_;
  std::vector<ParamBlock> blocks_;
  std::vector<T> params_;
};

/// Adam with bias correction (beta1 0.9, beta2 0.999, eps 1e-8):
/// p -= lr * m_hat / (sqrt(v_hat) + eps).
template <class T>
struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<T> m;
  std::vector<T> v;
  long step_count = 0;

  void step(std::vector<T>& params, const std::vector<T>& grad, double lr);
};

}  // namespace qgda::unet
