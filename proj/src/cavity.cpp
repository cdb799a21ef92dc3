// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/cavity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/rng.hpp"
#include "pocketscreen/simd/kernels.hpp"

namespace pocketscreen {
namespace {

constexpr double kGridPad = 5.0;  // A of padding around the bounding box

struct Grid {
  Vec3 lo;
  int nx = 0, ny = 0, nz = 0;
  double h = 1.0;

  std::size_t size() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  std::size_t idx(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * ny + j) * nz + k;
  }
  Vec3 point(int i, int j, int k) const {
    return {lo.x + i * h, lo.y + j * h, lo.z + k * h};
  }
};

Grid make_grid(const ProteinStructure& s, double spacing) {
  Vec3 mn = s.atoms[0].position, mx = mn;
  for (const Atom& a : s.atoms) {
    mn.x = std::min(mn.x, a.position.x);
    mn.y = std::min(mn.y, a.position.y);
    mn.z = std::min(mn.z, a.position.z);
    mx.x = std::max(mx.x, a.position.x);
    mx.y = std::max(mx.y, a.position.y);
    mx.z = std::max(mx.z, a.position.z);
  }
  Grid g;
  g.h = spacing;
  g.lo = {mn.x - kGridPad, mn.y - kGridPad, mn.z - kGridPad};
  g.nx = static_cast<int>(std::floor((mx.x + kGridPad - g.lo.x) / spacing)) + 1;
  g.ny = static_cast<int>(std::floor((mx.y + kGridPad - g.lo.y) / spacing)) + 1;
  g.nz = static_cast<int>(std::floor((mx.z + kGridPad - g.lo.z) / spacing)) + 1;
  return g;
}

void stamp_occupancy(const ProteinStructure& s, const DetectorConfig& cfg,
                     const Grid& g, std::vector<std::uint8_t>& occ) {
  for (const Atom& a : s.atoms) {
    double r = cfg.radius_of(a.element) + cfg.probe_margin;
    double r2 = r * r;
    const Vec3& p = a.position;
    int i0 = std::max(0, static_cast<int>(std::ceil((p.x - r - g.lo.x) / g.h)));
    int i1 = std::min(g.nx - 1, static_cast<int>(std::floor((p.x + r - g.lo.x) / g.h)));
    int j0 = std::max(0, static_cast<int>(std::ceil((p.y - r - g.lo.y) / g.h)));
    int j1 = std::min(g.ny - 1, static_cast<int>(std::floor((p.y + r - g.lo.y) / g.h)));
    int k0 = std::max(0, static_cast<int>(std::ceil((p.z - r - g.lo.z) / g.h)));
    int k1 = std::min(g.nz - 1, static_cast<int>(std::floor((p.z + r - g.lo.z) / g.h)));
    for (int i = i0; i <= i1; ++i) {
      double dx = g.lo.x + i * g.h - p.x;
      for (int j = j0; j <= j1; ++j) {
        double dy = g.lo.y + j * g.h - p.y;
        double dxy2 = dx * dx + dy * dy;
        if (dxy2 > r2) continue;
        for (int k = k0; k <= k1; ++k) {
          double dz = g.lo.z + k * g.h - p.z;
          if (dxy2 + dz * dz <= r2) occ[g.idx(i, j, k)] = 1;
        }
      }
    }
  }
}

// One sweep direction: for every cell, does a ray toward -d (resp. +d) hit an
// occupied cell? Computed by a single pass in an order where the predecessor
// cell along -d is always visited first.
void sweep_flags(const Grid& g, const std::vector<std::uint8_t>& occ, int dx,
                 int dy, int dz, std::vector<std::uint8_t>& flag) {
  int ib = dx >= 0 ? 0 : g.nx - 1, ie = dx >= 0 ? g.nx : -1, is = dx >= 0 ? 1 : -1;
  int jb = dy >= 0 ? 0 : g.ny - 1, je = dy >= 0 ? g.ny : -1, js = dy >= 0 ? 1 : -1;
  int kb = dz >= 0 ? 0 : g.nz - 1, ke = dz >= 0 ? g.nz : -1, ks = dz >= 0 ? 1 : -1;
  for (int i = ib; i != ie; i += is) {
    int pi = i - dx;
    bool iok = pi >= 0 && pi < g.nx;
    for (int j = jb; j != je; j += js) {
      int pj = j - dy;
      bool jok = iok && pj >= 0 && pj < g.ny;
      for (int k = kb; k != ke; k += ks) {
        int pk = k - dz;
        std::uint8_t f = 0;
        if (jok && pk >= 0 && pk < g.nz) {
          std::size_t p = g.idx(pi, pj, pk);
          f = static_cast<std::uint8_t>(occ[p] | flag[p]);
        }
        flag[g.idx(i, j, k)] = f;
      }
    }
  }
}

}  // namespace

std::vector<Cavity> detect_cavities(const ProteinStructure& structure,
                                    const DetectorConfig& cfg) {
  if (structure.atoms.empty()) throw DataError("detect_cavities: empty structure");
  if (cfg.grid_spacing <= 0) throw ConfigError("grid_spacing must be > 0");
  if (cfg.psp_min_events < 1 || cfg.psp_min_events > 7)
    throw ConfigError("psp_min_events must be in 1..7");

  Grid g = make_grid(structure, cfg.grid_spacing);
  std::vector<std::uint8_t> occ(g.size(), 0);
  stamp_occupancy(structure, cfg, g, occ);

  static const int kDirs[7][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1},
                                  {1, 1, -1}, {1, -1, 1}, {-1, 1, 1}};
  std::vector<std::uint8_t> psp(g.size(), 0);
  std::vector<std::uint8_t> before(g.size()), after(g.size());
  for (const auto& d : kDirs) {
    sweep_flags(g, occ, d[0], d[1], d[2], before);
    sweep_flags(g, occ, -d[0], -d[1], -d[2], after);
    for (std::size_t c = 0; c < g.size(); ++c)
      psp[c] = static_cast<std::uint8_t>(psp[c] + (before[c] & after[c] & ~occ[c] & 1));
  }

  std::vector<std::uint8_t> probe(g.size(), 0);
  for (std::size_t c = 0; c < g.size(); ++c)
    probe[c] = static_cast<std::uint8_t>(!occ[c] && psp[c] >= cfg.psp_min_events);

  // 26-connected clustering over probe cells.
  std::vector<Cavity> cavities;
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::vector<std::size_t> member_cells;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      for (int k = 0; k < g.nz; ++k) {
        std::size_t c0 = g.idx(i, j, k);
        if (!probe[c0] || seen[c0]) continue;
        member_cells.clear();
        std::deque<std::array<int, 3>> queue{{i, j, k}};
        seen[c0] = 1;
        while (!queue.empty()) {
          auto [ci, cj, ck] = queue.front();
          queue.pop_front();
          member_cells.push_back(g.idx(ci, cj, ck));
          for (int di = -1; di <= 1; ++di) {
            for (int dj = -1; dj <= 1; ++dj) {
              for (int dk = -1; dk <= 1; ++dk) {
                if (!di && !dj && !dk) continue;
                int ni = ci + di, nj = cj + dj, nk = ck + dk;
                if (ni < 0 || ni >= g.nx || nj < 0 || nj >= g.ny || nk < 0 ||
                    nk >= g.nz)
                  continue;
                std::size_t nc = g.idx(ni, nj, nk);
                if (probe[nc] && !seen[nc]) {
                  seen[nc] = 1;
                  queue.push_back({ni, nj, nk});
                }
              }
            }
          }
        }
        if (member_cells.size() < static_cast<std::size_t>(cfg.min_cluster_points))
          continue;
        // Cell index = lexicographic (i,j,k), so sorting fixes the summation
        // and serialization order independent of traversal.
        std::sort(member_cells.begin(), member_cells.end());
        Cavity cav;
        cav.probe_points.reserve(member_cells.size());
        Vec3 sum;
        for (std::size_t c : member_cells) {
          int ci = static_cast<int>(c / (static_cast<std::size_t>(g.ny) * g.nz));
          int cj = static_cast<int>((c / g.nz) % g.ny);
          int ck = static_cast<int>(c % g.nz);
          Vec3 p = g.point(ci, cj, ck);
          cav.probe_points.push_back(p);
          sum += p;
        }
        cav.size_score = static_cast<long>(cav.probe_points.size());
        cav.center = sum * (1.0 / static_cast<double>(cav.probe_points.size()));
        cavities.push_back(std::move(cav));
      }
    }
  }

  std::sort(cavities.begin(), cavities.end(), [](const Cavity& a, const Cavity& b) {
    if (a.size_score != b.size_score) return a.size_score > b.size_score;
    if (a.center.x != b.center.x) return a.center.x < b.center.x;
    if (a.center.y != b.center.y) return a.center.y < b.center.y;
    return a.center.z < b.center.z;
  });
  if (cavities.size() > static_cast<std::size_t>(cfg.max_cavities))
    cavities.resize(static_cast<std::size_t>(cfg.max_cavities));
  return cavities;
}

Pocket holo_pocket(const ProteinStructure& structure, const LigandConformer& ligand,
                   const PocketConfig& cfg) {
  if (ligand.atoms.empty()) throw DataError("holo_pocket: empty ligand");
  Coords3 lig = pack_coords(ligand.atoms);
  const auto& ker = simd::kernels();
  double d2 = cfg.holo_radius_d * cfg.holo_radius_d;

  Pocket p;
  p.source = PocketSource::holo;
  Vec3 sum;
  for (std::size_t i = 0; i < structure.atoms.size(); ++i) {
    const Vec3& pos = structure.atoms[i].position;
    double m = ker.min_dist_sq(lig.xs.data(), lig.ys.data(), lig.zs.data(),
                               lig.size(), pos.x, pos.y, pos.z);
    if (m <= d2) {
      p.atom_indices.push_back(static_cast<int>(i));
      sum += pos;
    }
  }
  if (p.atom_indices.empty())
    throw DataError("holo_pocket: no protein atom within " +
                    std::to_string(cfg.holo_radius_d) + " A of the ligand");

  for (int ai : p.atom_indices) {
    const Residue& r =
        structure.residues[static_cast<std::size_t>(structure.atoms[ai].residue_index)];
    p.residue_keys.emplace_back(r.chain_id, r.seq_num);
  }
  std::sort(p.residue_keys.begin(), p.residue_keys.end());
  p.residue_keys.erase(std::unique(p.residue_keys.begin(), p.residue_keys.end()),
                       p.residue_keys.end());
  p.center = sum * (1.0 / static_cast<double>(p.atom_indices.size()));
  return p;
}

Pocket cavity_residue_pocket(const ProteinStructure& structure, const Cavity& cavity,
                             const PocketConfig& cfg) {
  if (cavity.probe_points.empty()) throw DataError("cavity_residue_pocket: empty cavity");
  Coords3 probes;
  probes.reserve(cavity.probe_points.size());
  for (const Vec3& p : cavity.probe_points) probes.push(p);
  const auto& ker = simd::kernels();
  double d2 = cfg.cavity_residue_radius * cfg.cavity_residue_radius;

  Pocket p;
  p.source = PocketSource::cavity;
  p.center = cavity.center;
  for (const Residue& r : structure.residues) {
    bool hit = false;
    for (int ai : r.atom_indices) {
      const Vec3& pos = structure.atoms[static_cast<std::size_t>(ai)].position;
      double m = ker.min_dist_sq(probes.xs.data(), probes.ys.data(),
                                 probes.zs.data(), probes.size(), pos.x, pos.y,
                                 pos.z);
      if (m <= d2) {
        hit = true;
        break;
      }
    }
    if (hit) {
      p.residue_keys.emplace_back(r.chain_id, r.seq_num);
      p.atom_indices.insert(p.atom_indices.end(), r.atom_indices.begin(),
                            r.atom_indices.end());
    }
  }
  std::sort(p.residue_keys.begin(), p.residue_keys.end());
  std::sort(p.atom_indices.begin(), p.atom_indices.end());
  return p;  // may be empty; Pocket::valid() reports that
}

Pocket crop_enlarged(const ProteinStructure& structure, const Vec3& center,
                     const PocketConfig& cfg) {
  if (cfg.max_pocket_atoms < 8) throw ConfigError("max_pocket_atoms must be >= 8");
  double r2 = cfg.enlarged_radius * cfg.enlarged_radius;
  std::vector<int> cand;
  for (std::size_t i = 0; i < structure.atoms.size(); ++i)
    if (dist2(structure.atoms[i].position, center) <= r2)
      cand.push_back(static_cast<int>(i));
  if (cand.empty())
    throw DataError("crop_enlarged: no atoms within " +
                    std::to_string(cfg.enlarged_radius) + " A of center");

  if (cand.size() > static_cast<std::size_t>(cfg.max_pocket_atoms)) {
    // Key the stream on (seed, structure id, quantized center) so the same
    // site always draws the same subset.
    char key[160];
    std::snprintf(key, sizeof key, "%s:%.3f:%.3f:%.3f", structure.id.c_str(),
                  center.x, center.y, center.z);
    std::uint64_t seed =
        mix_seed(cfg.downsample_seed, fnv1a64(key, std::char_traits<char>::length(key)));
    Rng rng(seed);
    auto keep = rng.sample_indices(cand.size(), static_cast<std::size_t>(cfg.max_pocket_atoms));
    std::vector<int> kept;
    kept.reserve(keep.size());
    for (std::size_t k : keep) kept.push_back(cand[k]);
    cand = std::move(kept);
  }

  Pocket p;
  p.source = PocketSource::manual;
  p.center = center;
  p.atom_indices = std::move(cand);
  for (int ai : p.atom_indices) {
    const Residue& r =
        structure.residues[static_cast<std::size_t>(structure.atoms[ai].residue_index)];
    p.residue_keys.emplace_back(r.chain_id, r.seq_num);
  }
  std::sort(p.residue_keys.begin(), p.residue_keys.end());
  p.residue_keys.erase(std::unique(p.residue_keys.begin(), p.residue_keys.end()),
                       p.residue_keys.end());
  return p;
}

}  // namespace pocketscreen
