// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pocketscreen/cavity.hpp"
#include "pocketscreen/rng.hpp"

namespace pocketscreen {

struct LabelConfig {
  double tau_pos = 0.5;        // IoU at or above -> positive
  double tau_neg = 0.1;        // IoU at or below -> negative
  double negative_ratio = 0.5; // fraction of negatives sampled per step
  std::uint64_t rng_seed = 0;
};

enum class CavityLabel { positive, negative, ignore };

struct LabeledCavity {
  Cavity cavity;
  Pocket pocket;  // residue-level, via cavity_residue_pocket
  double iou = 0.0;
  double coverage = 0.0;
  CavityLabel label = CavityLabel::ignore;
};

// Overlap ratios on residue_keys. iou errors if both sides are empty;
// coverage errors if the holo side is empty.
double iou(const Pocket& a, const Pocket& b);
double coverage(const Pocket& holo, const Pocket& cavity_pocket);

// Fills iou/coverage/label on each (cavity, pocket) precursor. Label depends
// only on the IoU thresholds; an empty cavity pocket scores IoU 0 and labels
// negative, but is skipped by the training samplers below (not encodable).
std::vector<LabeledCavity> label_cavities(const Pocket& holo,
                                          std::vector<LabeledCavity> precursors,
                                          const LabelConfig& cfg);

// Per-step draw: one uniform positive (if any) plus ceil(negative_ratio * n)
// of the n valid negatives. Pure function of the generator state.
struct CavitySample {
  std::optional<std::size_t> positive;  // index into the labeled list
  std::vector<std::size_t> negatives;
};
CavitySample sample_training_cavities(const std::vector<LabeledCavity>& labeled,
                                      const LabelConfig& cfg, Rng& rng);

// Min distance from center to any ligand heavy atom (element != H).
double dca(const Vec3& center, const LigandConformer& ligand);

}  // namespace pocketscreen
