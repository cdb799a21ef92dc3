// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pocketscreen/geom.hpp"
#include "pocketscreen/moldata.hpp"

namespace pocketscreen {

// Planted-ground-truth screening world: each target is a jittered-lattice atom
// ball with several spherical voids carved out. One void per target is the
// binding site; the shell around it is lined with a two-element chemotype code,
// actives realize that code, decoys realize one of the other codes.
struct SyntheticWorldSpec {
  int n_targets = 20;
  int cavities_min = 3;  // carved voids per target, uniform in [min, max]
  int cavities_max = 6;
  int actives_per_target = 20;
  int decoys_per_target = 400;
  double noise_scale = 1.8;  // A, ligand atom scatter
  std::uint64_t seed = 1;
  std::vector<std::string> chemotype_alphabet = {
      "NN", "NO", "NS", "NP", "OO", "OS", "OP", "SS", "SP", "PP"};
};

struct TargetInfo {
  std::string target_id;
  std::string split;  // train | val | test
  std::string code;
  std::uint64_t seed = 0;
  Vec3 binding_center;
  std::vector<Vec3> void_centers;  // index 0 is the binding void
};

struct World {
  SyntheticWorldSpec spec;
  std::vector<TargetInfo> info;
  std::vector<ScreeningTarget> targets;  // parallel to info
};

// Deterministic in spec.seed; writing twice produces byte-identical files.
// Layout: manifest.json, proteins/<id>.pdb, ligands/<id>.jsonl, holo/<id>.jsonl.
void gen_synthetic(const SyntheticWorldSpec& spec, const std::string& data_dir);

World load_world(const std::string& data_dir);

}  // namespace pocketscreen
