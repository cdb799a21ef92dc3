// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "pocketscreen/cavity.hpp"
#include "pocketscreen/moldata.hpp"
#include "pocketscreen/objectives.hpp"

namespace pocketscreen {

struct RankedEntry {
  std::string ligand_id;
  double score = 0.0;
  bool is_active = false;
};

// Entries held in rank order: descending score, ties kept in input order
// (stable sort). Rank of entries[i] is i+1.
struct RankedLibrary {
  std::vector<RankedEntry> entries;
  std::size_t size() const { return entries.size(); }
  std::size_t active_count() const;
};

RankedLibrary make_ranked(std::vector<RankedEntry> entries);

// Truchon-Bayly early-recognition metric. Requires both classes present.
double bedroc(const RankedLibrary& ranked, double alpha = 80.5);

// n_hits * N / (k * N_act) with k = ceil(delta_pct * N / 100).
double enrichment_factor(const RankedLibrary& ranked, double delta_pct = 1.0);

// Rank-sum (Mann-Whitney) form with midrank tie handling.
double auroc(const RankedLibrary& ranked);

// ---- screening ---------------------------------------------------------------

// Scores every library ligand against one chosen pocket:
// score = t * dot(e_pocket, e_ligand) + b.
RankedLibrary screen_annotated(const ScreeningTarget& target, const Pocket& pocket,
                               const ModelParams& params, const PocketConfig& pcfg);

enum class ScreenMode { max_pool, adapter };

// Scores against every candidate cavity. max_pool takes the per-ligand maximum
// of single-cavity scores; adapter scores t * dot(aggregated_cavity,
// projected_ligand) + b with attention weights from the projected ligand.
RankedLibrary screen_blind(const ScreeningTarget& target,
                           const std::vector<Cavity>& cavities,
                           const ModelParams& params, const PocketConfig& pcfg,
                           ScreenMode mode);

// ---- pocket identification ---------------------------------------------------

constexpr std::array<double, 4> kPocketIdThresholds = {1.0, 2.0, 3.0, 4.0};

// Hit counts over (holo ligand, threshold) cases for two cavity rankings:
// the model's score ranking and the oracle ranking by DCA itself.
struct PocketIdCounts {
  std::array<long, 4> top1_model{};
  std::array<long, 4> topn_model{};
  std::array<long, 4> top1_ideal{};
  std::array<long, 4> topn_ideal{};
  long cases = 0;

  double rate(const std::array<long, 4>& hits, std::size_t i) const {
    return cases == 0 ? 0.0 : static_cast<double>(hits[i]) / cases;
  }
};

// One structure's contribution. Model ranking: descending t*dot + b between
// each ligand's embedding and each cavity crop's embedding, ties in detector
// order. top-n uses n = |holo_ligands|. Zero cavities count as misses.
void pocket_id_accumulate(const ProteinStructure& structure,
                          const std::vector<Cavity>& cavities,
                          const std::vector<LigandConformer>& holo_ligands,
                          const ModelParams& params, const PocketConfig& pcfg,
                          PocketIdCounts& acc);

// ---- aggregation -------------------------------------------------------------

struct TargetMetrics {
  double auroc = 0.0;
  double bedroc = 0.0;
  double ef1 = 0.0;
};

struct MetricsReport {
  std::map<std::string, TargetMetrics> per_target;
  TargetMetrics averages;  // unweighted arithmetic means
};

MetricsReport make_metrics_report(const std::map<std::string, TargetMetrics>& per_target);

// target_id,auroc,bedroc,ef1 rows plus a trailing mean row.
std::string metrics_to_csv(const MetricsReport& report);

}  // namespace pocketscreen
