// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pocketscreen/encoder.hpp"

namespace pocketscreen {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moments over the flat parameter vector in visit_params order.
struct AdamState {
  long step = 0;
  std::vector<double> m, v;
};

// One bias-corrected Adam update. Only parameter blocks whose visitation name
// starts with one of `trainable_prefixes` are touched; everything else,
// including its optimizer state, stays bit-identical. An empty prefix list
// trains everything.
void adam_step(ModelParams& params, ModelParams& grads, AdamState& state,
               const AdamConfig& cfg,
               const std::vector<std::string>& trainable_prefixes = {});

}  // namespace pocketscreen
