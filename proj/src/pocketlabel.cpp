// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/pocketlabel.hpp"

#include <algorithm>
#include <cmath>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/simd/kernels.hpp"

namespace pocketscreen {
namespace {

// residue_keys are kept sorted, so set sizes come from a single merge pass.
std::size_t intersection_size(const std::vector<ResKey>& a,
                              const std::vector<ResKey>& b) {
  std::size_t n = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else
      ++n, ++i, ++j;
  }
  return n;
}

}  // namespace

double iou(const Pocket& a, const Pocket& b) {
  if (a.residue_keys.empty() && b.residue_keys.empty())
    throw DataError("iou: both pockets empty");
  std::size_t inter = intersection_size(a.residue_keys, b.residue_keys);
  std::size_t uni = a.residue_keys.size() + b.residue_keys.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double coverage(const Pocket& holo, const Pocket& cavity_pocket) {
  if (holo.residue_keys.empty()) throw DataError("coverage: empty holo pocket");
  std::size_t inter = intersection_size(holo.residue_keys, cavity_pocket.residue_keys);
  return static_cast<double>(inter) / static_cast<double>(holo.residue_keys.size());
}

std::vector<LabeledCavity> label_cavities(const Pocket& holo,
                                          std::vector<LabeledCavity> precursors,
                                          const LabelConfig& cfg) {
  if (!(cfg.tau_neg >= 0.0 && cfg.tau_neg < cfg.tau_pos && cfg.tau_pos <= 1.0))
    throw ConfigError("label thresholds must satisfy 0 <= tau_neg < tau_pos <= 1");
  if (!holo.valid()) throw DataError("label_cavities: invalid holo pocket");
  for (LabeledCavity& lc : precursors) {
    lc.iou = lc.pocket.residue_keys.empty() ? 0.0 : iou(holo, lc.pocket);
    lc.coverage = coverage(holo, lc.pocket);
    if (lc.iou >= cfg.tau_pos)
      lc.label = CavityLabel::positive;
    else if (lc.iou <= cfg.tau_neg)
      lc.label = CavityLabel::negative;
    else
      lc.label = CavityLabel::ignore;
  }
  return precursors;
}

CavitySample sample_training_cavities(const std::vector<LabeledCavity>& labeled,
                                      const LabelConfig& cfg, Rng& rng) {
  if (!(cfg.negative_ratio > 0.0 && cfg.negative_ratio <= 1.0))
    throw ConfigError("negative_ratio must be in (0, 1]");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (!labeled[i].pocket.valid()) continue;
    if (labeled[i].label == CavityLabel::positive) pos.push_back(i);
    if (labeled[i].label == CavityLabel::negative) neg.push_back(i);
  }
  CavitySample out;
  if (!pos.empty()) out.positive = pos[rng.below(pos.size())];
  if (!neg.empty()) {
    std::size_t k = static_cast<std::size_t>(
        std::ceil(cfg.negative_ratio * static_cast<double>(neg.size())));
    for (std::size_t i : rng.sample_indices(neg.size(), k))
      out.negatives.push_back(neg[i]);
  }
  return out;
}

double dca(const Vec3& center, const LigandConformer& ligand) {
  Coords3 heavy;
  for (const Atom& a : ligand.atoms)
    if (a.element != "H") heavy.push(a.position);
  if (heavy.empty()) throw DataError("dca: ligand has no heavy atoms");
  const auto& ker = simd::kernels();
  double m = ker.min_dist_sq(heavy.xs.data(), heavy.ys.data(), heavy.zs.data(),
                             heavy.size(), center.x, center.y, center.z);
  return std::sqrt(m);
}

}  // namespace pocketscreen
