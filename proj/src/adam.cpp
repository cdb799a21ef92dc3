// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/adam.hpp"

#include <cmath>

#include "pocketscreen/errors.hpp"

namespace pocketscreen {
namespace {

bool name_trainable(const char* name, const std::vector<std::string>& prefixes) {
  if (prefixes.empty()) return true;
  std::string s(name);
  for (const auto& p : prefixes)
    if (s.rfind(p, 0) == 0) return true;
  return false;
}

}  // namespace

void adam_step(ModelParams& params, ModelParams& grads, AdamState& state,
               const AdamConfig& cfg,
               const std::vector<std::string>& trainable_prefixes) {
  std::size_t total = param_count(params);
  if (param_count(grads) != total)
    throw ConfigError("adam_step: gradient shape mismatch");
  if (state.m.empty()) {
    state.m.assign(total, 0.0);
    state.v.assign(total, 0.0);
  } else if (state.m.size() != total) {
    throw ConfigError("adam_step: optimizer state shape mismatch");
  }

  ++state.step;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  // Walk params and grads in lockstep; visit_params order is the state layout.
  struct Cursor {
    double* data;
    std::size_t n;
    const char* name;
  };
  std::vector<Cursor> pc, gc;
  visit_params(params, [&pc](const char* name, double* d, std::size_t n) {
    pc.push_back({d, n, name});
  });
  visit_params(grads, [&gc](const char* name, double* d, std::size_t n) {
    gc.push_back({d, n, name});
  });

  std::size_t off = 0;
  for (std::size_t b = 0; b < pc.size(); ++b) {
    if (pc[b].n != gc[b].n) throw ConfigError("adam_step: block shape mismatch");
    if (name_trainable(pc[b].name, trainable_prefixes)) {
      for (std::size_t i = 0; i < pc[b].n; ++i) {
        std::size_t f = off + i;
        double g = gc[b].data[i];
        state.m[f] = cfg.beta1 * state.m[f] + (1.0 - cfg.beta1) * g;
        state.v[f] = cfg.beta2 * state.v[f] + (1.0 - cfg.beta2) * g * g;
        double mhat = state.m[f] / bc1;
        double vhat = state.v[f] / bc2;
        pc[b].data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      }
    }
    off += pc[b].n;
  }
}

}  // namespace pocketscreen
