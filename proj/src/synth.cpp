// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/synth.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/jsonio.hpp"
#include "pocketscreen/rng.hpp"

namespace pocketscreen {
namespace {

// Geometry of a target. These are tuned together: the lattice ball must be
// large enough to hold up to six non-overlapping voids whose centers sit at
// least kVoidSeparation apart, residue granularity must keep the
// residue-level IoU between distinct voids' pockets near zero, and the
// separation must exceed the 10 A encoder crop radius plus the lining shell's
// outer radius (8 A) so a non-binding cavity crop never picks up atoms of the
// binding void's code lining.
constexpr double kBallRadius = 23.5;
constexpr double kLattice = 2.2;
constexpr double kJitter = 0.25;
constexpr double kVoidRadius = 5.5;
constexpr double kVoidCenterLo = 13.2;
constexpr double kVoidCenterHi = 14.5;
constexpr double kVoidSeparation = 18.5;
constexpr double kLiningShell = 2.5;   // lined shell beyond each void wall
constexpr double kLiningProb = 0.8;
constexpr int kHoloAtoms = 10;
constexpr int kMaxPlacementRetries = 100;
constexpr int kMaxResidueAtoms = 4;

Vec3 normal3(Rng& rng, double sigma) {
  return {sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()};
}

// Proper rotation from Gram-Schmidt over Gaussian draws. Returns false on a
// (vanishingly rare) degenerate draw so the caller can retry.
bool random_rotation(Rng& rng, Mat3& out) {
  Vec3 a = normal3(rng, 1.0), b = normal3(rng, 1.0);
  double na = norm(a);
  if (na < 1e-6) return false;
  a = a * (1.0 / na);
  b = b - a * dot(a, b);
  double nb = norm(b);
  if (nb < 1e-6) return false;
  b = b * (1.0 / nb);
  Vec3 c = {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
  out = Mat3{{a.x, b.x, c.x, a.y, b.y, c.y, a.z, b.z, c.z}};
  return true;
}

std::vector<Vec3> place_voids(Rng& rng, int n_voids, const std::string& target_id) {
  const Vec3 tmpl[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                        {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int attempt = 0; attempt < kMaxPlacementRetries; ++attempt) {
    Mat3 rot;
    if (!random_rotation(rng, rot)) continue;
    std::vector<int> idx = {0, 1, 2, 3, 4, 5};
    rng.shuffle(idx);
    std::vector<Vec3> centers;
    for (int v = 0; v < n_voids; ++v) {
      double r = rng.uniform(kVoidCenterLo, kVoidCenterHi);
      centers.push_back(rot.apply(tmpl[idx[static_cast<std::size_t>(v)]]) * r);
    }
    bool ok = true;
    for (std::size_t i = 0; i < centers.size() && ok; ++i)
      for (std::size_t j = i + 1; j < centers.size(); ++j)
        if (dist(centers[i], centers[j]) < kVoidSeparation) {
          ok = false;
          break;
        }
    if (ok) return centers;
  }
  throw DataError("gen_synthetic: void placement failed for " + target_id);
}

std::string pick_code_element(Rng& rng, const std::string& code) {
  return std::string(1, code[rng.below(2)]);
}

// A ligand realizes its code exactly: every atom draws one of the code's two
// elements, and all the variation between conformers comes from the Gaussian
// position scatter.
LigandConformer make_ligand(Rng& rng, const std::string& id, const Vec3& origin,
                            int n_atoms, const std::string& code,
                            double noise_scale, ActivityLabel label) {
  LigandConformer lig;
  lig.id = id;
  lig.activity_label = label;
  for (int a = 0; a < n_atoms; ++a) {
    Atom atom;
    atom.position = origin + normal3(rng, noise_scale);
    atom.element = pick_code_element(rng, code);
    lig.atoms.push_back(atom);
  }
  return lig;
}

struct GeneratedTarget {
  ProteinStructure protein;
  LigandConformer holo;
  std::vector<LigandConformer> library;
  std::vector<Vec3> void_centers;
  std::string code;
};

GeneratedTarget make_target(const SyntheticWorldSpec& spec, int t,
                            std::uint64_t target_seed, const std::string& id) {
  Rng rng(target_seed);
  GeneratedTarget out;
  out.code = spec.chemotype_alphabet[static_cast<std::size_t>(t) %
                                     spec.chemotype_alphabet.size()];

  int n_voids = spec.cavities_min +
                static_cast<int>(rng.below(static_cast<std::uint64_t>(
                    spec.cavities_max - spec.cavities_min + 1)));
  out.void_centers = place_voids(rng, n_voids, id);
  const Vec3 binding = out.void_centers[0];

  // Jittered lattice ball, voids carved by jittered position.
  out.protein.id = id;
  int n = static_cast<int>(std::ceil(kBallRadius / kLattice));
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j)
      for (int k = -n; k <= n; ++k) {
        Vec3 p = {i * kLattice, j * kLattice, k * kLattice};
        if (norm(p) > kBallRadius) continue;
        p += normal3(rng, kJitter);
        bool carved = false;
        for (const Vec3& c : out.void_centers)
          if (dist(p, c) < kVoidRadius) {
            carved = true;
            break;
          }
        if (carved) continue;
        Atom atom;
        atom.position = p;
        atom.element = "C";
        out.protein.atoms.push_back(atom);
      }
  if (out.protein.atoms.empty()) throw DataError("gen_synthetic: empty target");

  // Line the binding-void wall with the chemotype code. The other voids get a
  // hydrogen dressing instead, so every pocket has its own wall chemistry and
  // only the binding one matches any ligand code.
  for (Atom& atom : out.protein.atoms) {
    double d = dist(atom.position, binding);
    if (d > kVoidRadius && d <= kVoidRadius + kLiningShell &&
        rng.bernoulli(kLiningProb)) {
      atom.element = pick_code_element(rng, out.code);
      continue;
    }
    for (std::size_t v = 1; v < out.void_centers.size(); ++v) {
      double dv = dist(atom.position, out.void_centers[v]);
      if (dv > kVoidRadius && dv <= kVoidRadius + kLiningShell &&
          rng.bernoulli(kLiningProb)) {
        atom.element = "H";
        break;
      }
    }
  }

  // Short residues in generation order; a break whenever consecutive atoms
  // jump more than a lattice step and a half (column transitions, void gaps).
  int seq = 1;
  for (std::size_t a = 0; a < out.protein.atoms.size(); ++a) {
    bool fresh = out.protein.residues.empty();
    if (!fresh) {
      Residue& last = out.protein.residues.back();
      double gap = dist(out.protein.atoms[a].position,
                        out.protein.atoms[a - 1].position);
      if (static_cast<int>(last.atom_indices.size()) >= kMaxResidueAtoms ||
          gap > 1.5 * kLattice)
        fresh = true;
    }
    if (fresh) {
      Residue r;
      r.chain_id = 'A';
      r.seq_num = seq++;
      out.protein.residues.push_back(r);
    }
    out.protein.residues.back().atom_indices.push_back(static_cast<int>(a));
    out.protein.atoms[a].residue_index =
        static_cast<int>(out.protein.residues.size()) - 1;
  }

  out.holo = make_ligand(rng, id + "_holo", binding, kHoloAtoms, out.code,
                         spec.noise_scale, ActivityLabel::unlabeled);

  char buf[64];
  for (int a = 0; a < spec.actives_per_target; ++a) {
    std::snprintf(buf, sizeof(buf), "%s_act_%03d", id.c_str(), a);
    int n_atoms = 8 + static_cast<int>(rng.below(5));
    out.library.push_back(make_ligand(rng, buf, Vec3{0, 0, 0}, n_atoms, out.code,
                                      spec.noise_scale, ActivityLabel::active));
  }
  std::size_t own = 0;
  for (std::size_t c = 0; c < spec.chemotype_alphabet.size(); ++c)
    if (spec.chemotype_alphabet[c] == out.code) own = c;
  for (int d = 0; d < spec.decoys_per_target; ++d) {
    std::snprintf(buf, sizeof(buf), "%s_dec_%03d", id.c_str(), d);
    std::size_t other =
        (own + 1 + rng.below(spec.chemotype_alphabet.size() - 1)) %
        spec.chemotype_alphabet.size();
    int n_atoms = 8 + static_cast<int>(rng.below(5));
    out.library.push_back(make_ligand(rng, buf, Vec3{0, 0, 0}, n_atoms,
                                      spec.chemotype_alphabet[other],
                                      spec.noise_scale, ActivityLabel::decoy));
  }
  return out;
}

void validate(const SyntheticWorldSpec& spec) {
  if (spec.n_targets < 3)
    throw ConfigError("n_targets must be >= 3 (train/val/test split)");
  if (spec.cavities_min < 2)
    throw ConfigError("cavities_min must be >= 2 (blind must differ from oracle)");
  if (spec.cavities_max < spec.cavities_min || spec.cavities_max > 6)
    throw ConfigError("cavities_max must be in [cavities_min, 6]");
  if (spec.actives_per_target < 1 || spec.decoys_per_target < 1)
    throw ConfigError("need at least one active and one decoy per target");
  if (!(spec.noise_scale > 0)) throw ConfigError("noise_scale must be > 0");
  if (spec.chemotype_alphabet.size() < 2)
    throw ConfigError("chemotype alphabet needs at least 2 codes");
  for (const std::string& c : spec.chemotype_alphabet)
    if (c.size() != 2) throw ConfigError("chemotype codes must be 2 characters");
}

std::string split_of(int t, int n_targets) {
  int n_test = std::max(1, n_targets / 4);
  int n_val = std::max(1, (n_targets - n_test) / 5);
  int n_train = n_targets - n_test - n_val;
  if (n_train < 1) throw ConfigError("n_targets too small for a nonempty split");
  if (t < n_train) return "train";
  if (t < n_train + n_val) return "val";
  return "test";
}

nlohmann::json vec_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}

Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("manifest: bad vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void gen_synthetic(const SyntheticWorldSpec& spec, const std::string& data_dir) {
  validate(spec);
  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["spec"] = {
      {"n_targets", spec.n_targets},
      {"cavities_min", spec.cavities_min},
      {"cavities_max", spec.cavities_max},
      {"actives_per_target", spec.actives_per_target},
      {"decoys_per_target", spec.decoys_per_target},
      {"noise_scale", spec.noise_scale},
      {"seed", spec.seed},
      {"chemotype_alphabet", spec.chemotype_alphabet},
  };
  manifest["targets"] = nlohmann::json::array();

  char idbuf[32];
  for (int t = 0; t < spec.n_targets; ++t) {
    std::snprintf(idbuf, sizeof(idbuf), "T%02d", t);
    std::string id = idbuf;
    std::uint64_t target_seed =
        mix_seed(spec.seed, static_cast<std::uint64_t>(t));
    GeneratedTarget gt = make_target(spec, t, target_seed, id);

    std::string protein_rel = "proteins/" + id + ".pdb";
    std::string ligands_rel = "ligands/" + id + ".jsonl";
    std::string holo_rel = "holo/" + id + ".jsonl";
    write_file(data_dir + "/" + protein_rel, serialize_protein(gt.protein));
    write_file(data_dir + "/" + ligands_rel, serialize_ligands(gt.library));
    write_file(data_dir + "/" + holo_rel, serialize_ligands({gt.holo}));

    nlohmann::json centers = nlohmann::json::array();
    for (const Vec3& c : gt.void_centers) centers.push_back(vec_json(c));
    manifest["targets"].push_back({
        {"target_id", id},
        {"split", split_of(t, spec.n_targets)},
        {"code", gt.code},
        {"seed", target_seed},
        {"binding_center", vec_json(gt.void_centers[0])},
        {"void_centers", centers},
        {"protein", protein_rel},
        {"ligands", ligands_rel},
        {"holo", holo_rel},
    });
  }
  write_file(data_dir + "/manifest.json", manifest.dump(1) + "\n");
}

World load_world(const std::string& data_dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(data_dir + "/manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what());
  }
  World w;
  try {
    const auto& sj = manifest.at("spec");
    w.spec.n_targets = sj.at("n_targets").get<int>();
    w.spec.cavities_min = sj.at("cavities_min").get<int>();
    w.spec.cavities_max = sj.at("cavities_max").get<int>();
    w.spec.actives_per_target = sj.at("actives_per_target").get<int>();
    w.spec.decoys_per_target = sj.at("decoys_per_target").get<int>();
    w.spec.noise_scale = sj.at("noise_scale").get<double>();
    w.spec.seed = sj.at("seed").get<std::uint64_t>();
    w.spec.chemotype_alphabet =
        sj.at("chemotype_alphabet").get<std::vector<std::string>>();

    for (const auto& tj : manifest.at("targets")) {
      TargetInfo info;
      info.target_id = tj.at("target_id").get<std::string>();
      info.split = tj.at("split").get<std::string>();
      info.code = tj.at("code").get<std::string>();
      info.seed = tj.at("seed").get<std::uint64_t>();
      info.binding_center = vec_from(tj.at("binding_center"));
      for (const auto& cj : tj.at("void_centers"))
        info.void_centers.push_back(vec_from(cj));

      ScreeningTarget target;
      target.target_id = info.target_id;
      target.structure = parse_protein(
          read_file(data_dir + "/" + tj.at("protein").get<std::string>()),
          info.target_id);
      target.library = parse_ligands(
          read_file(data_dir + "/" + tj.at("ligands").get<std::string>()));
      std::vector<LigandConformer> holo = parse_ligands(
          read_file(data_dir + "/" + tj.at("holo").get<std::string>()));
      if (holo.size() != 1)
        throw DataError(info.target_id + ": expected exactly one holo ligand");
      target.holo_ligand = holo[0];

      w.info.push_back(std::move(info));
      w.targets.push_back(std::move(target));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest.json: ") + e.what());
  }
  if (w.targets.empty()) throw DataError("manifest.json: no targets");
  return w;
}

}  // namespace pocketscreen
