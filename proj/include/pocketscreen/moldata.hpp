// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pocketscreen/geom.hpp"

namespace pocketscreen {

struct Atom {
  std::string element;     // normalized symbol; unknown species map to "X"
  Vec3 position;           // Angstrom
  int residue_index = -1;  // index into ProteinStructure::residues; -1 for ligands
};

struct Residue {
  char chain_id = 'A';
  int seq_num = 0;
  std::vector<int> atom_indices;  // into ProteinStructure::atoms, file order
};

struct ProteinStructure {
  std::string id;
  std::vector<Atom> atoms;
  std::vector<Residue> residues;  // first-appearance order
};

enum class ActivityLabel { active, decoy, unlabeled };

struct LigandConformer {
  std::string id;
  std::vector<Atom> atoms;
  ActivityLabel activity_label = ActivityLabel::unlabeled;
};

struct ScreeningTarget {
  std::string target_id;
  ProteinStructure structure;
  std::optional<LigandConformer> holo_ligand;
  std::vector<LigandConformer> library;
};

// Minimal fixed-column PDB subset: ATOM/HETATM of the first model. HETATM
// records are skipped. Element comes from columns 77-78 with a fallback to
// the first letter of the atom name.
ProteinStructure parse_protein(const std::string& text, const std::string& id = "");

// Inverse of parse_protein up to 1e-3 A coordinate quantization.
std::string serialize_protein(const ProteinStructure& s);

// JSON-lines, one object per ligand: {id, elements, coords, label?}.
std::vector<LigandConformer> parse_ligands(const std::string& text);
std::string serialize_ligands(const std::vector<LigandConformer>& ligands);

Vec3 centroid(std::span<const Atom> atoms);

Coords3 pack_coords(std::span<const Atom> atoms);

}  // namespace pocketscreen
