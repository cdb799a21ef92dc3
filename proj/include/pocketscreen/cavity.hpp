// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pocketscreen/geom.hpp"
#include "pocketscreen/moldata.hpp"

namespace pocketscreen {

// (chain, residue seq) pair, the unit of pocket overlap computations.
using ResKey = std::pair<char, int>;

struct Cavity {
  std::vector<Vec3> probe_points;  // buried grid points, lexicographic cell order
  Vec3 center;                     // centroid of probe_points
  long size_score = 0;             // |probe_points|; rank key
};

enum class PocketSource { holo, cavity, manual };

struct Pocket {
  std::vector<ResKey> residue_keys;  // sorted ascending
  std::vector<int> atom_indices;     // into the protein atom list, ascending
  Vec3 center;
  PocketSource source = PocketSource::manual;

  // A cavity far from every residue yields an empty pocket; callers must not
  // feed such pockets to the encoders.
  bool valid() const { return !atom_indices.empty(); }
};

struct DetectorConfig {
  double grid_spacing = 1.0;  // A
  int psp_min_events = 3;     // of the 7 scan directions
  int min_cluster_points = 30;
  int max_cavities = 10;
  double probe_margin = 1.4;  // added to the vdW radius for occupancy
  std::map<std::string, double> vdw_radii = {
      {"C", 1.70}, {"N", 1.55}, {"O", 1.52}, {"S", 1.80},
      {"H", 1.20}, {"P", 1.80}, {"X", 1.70}};

  double radius_of(const std::string& element) const {
    auto it = vdw_radii.find(element);
    return it != vdw_radii.end() ? it->second : vdw_radii.at("X");
  }
};

struct PocketConfig {
  double holo_radius_d = 6.0;         // A, ligand-neighborhood cut
  double enlarged_radius = 10.0;      // A, crop radius around a pocket center
  double cavity_residue_radius = 6.0; // A, probe-to-residue cut
  int max_pocket_atoms = 256;
  std::uint64_t downsample_seed = 0;
};

// Grid scan for buried voids: occupancy stamping, protein-solvent-protein ray
// counting along 7 directions, 26-connected clustering. Returns up to
// max_cavities clusters sorted by descending size, ties by ascending
// lexicographic center.
std::vector<Cavity> detect_cavities(const ProteinStructure& structure,
                                    const DetectorConfig& cfg);

// Atom-level pocket: protein atoms within holo_radius_d of any ligand atom.
Pocket holo_pocket(const ProteinStructure& structure, const LigandConformer& ligand,
                   const PocketConfig& cfg);

// Residue-level pocket: whole residues with any atom within
// cavity_residue_radius of any probe point. May be empty (invalid), not an
// error.
Pocket cavity_residue_pocket(const ProteinStructure& structure, const Cavity& cavity,
                             const PocketConfig& cfg);

// Atoms within enlarged_radius of center, down-sampled to max_pocket_atoms by
// a generator keyed on (downsample_seed, structure id, center rounded to
// 1e-3 A) so repeated crops of the same site are identical.
Pocket crop_enlarged(const ProteinStructure& structure, const Vec3& center,
                     const PocketConfig& cfg);

}  // namespace pocketscreen
