#pragma once

#include <cstdint>
#include <vector>

#include "moco/tensor.hpp"

namespace moco {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-6;  // decoupled: p -= lr * wd * p
};

struct AdamState {
  std::vector<tensor::Array<float>> m, v;
  std::int64_t step = 0;

  static AdamState zeros_like(const std::vector<tensor::Array<float>>& params);
};

// One bias-corrected Adam step with decoupled weight decay, in place.
void adam_update(std::vector<tensor::Array<float>>& params, const std::vector<tensor::Array<float>>& grads,
                 AdamState& state, const AdamConfig& config);

}  // namespace moco
