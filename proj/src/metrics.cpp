// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/pocketlabel.hpp"
#include "pocketscreen/simd/kernels.hpp"

namespace pocketscreen {
namespace {

EncItem pocket_item(const ProteinStructure& s, const Pocket& p) {
  EncItem item;
  item.atoms.reserve(p.atom_indices.size());
  for (int i : p.atom_indices) item.atoms.push_back(s.atoms[static_cast<std::size_t>(i)]);
  item.center = p.center;
  return item;
}

Embedding encode_ligand(const ModelParams& params, const LigandConformer& lig) {
  return encode(params.ligand_encoder, lig.atoms, centroid(lig.atoms));
}

double pair_score(const ModelParams& params, const Embedding& a, const Embedding& b) {
  double d = simd::kernels().dot(a.v.data(), b.v.data(), a.v.size());
  return params.loss.t() * d + params.loss.b;
}

}  // namespace

std::size_t RankedLibrary::active_count() const {
  std::size_t n = 0;
  for (const RankedEntry& e : entries)
    if (e.is_active) ++n;
  return n;
}

RankedLibrary make_ranked(std::vector<RankedEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) {
                     return a.score > b.score;
                   });
  RankedLibrary r;
  r.entries = std::move(entries);
  return r;
}

double bedroc(const RankedLibrary& ranked, double alpha) {
  std::size_t N = ranked.size();
  std::size_t n_act = ranked.active_count();
  if (n_act == 0 || n_act == N)
    throw DataError("bedroc: needs both actives and decoys");
  if (!(alpha > 0)) throw ConfigError("bedroc: alpha must be > 0");

  double Nd = static_cast<double>(N);
  double ra = static_cast<double>(n_act) / Nd;
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    if (ranked.entries[i].is_active)
      sum += std::exp(-alpha * static_cast<double>(i + 1) / Nd);

  double z = ra * (1.0 - std::exp(-alpha)) / (std::exp(alpha / Nd) - 1.0);
  double factor = ra * std::sinh(alpha / 2.0) /
                  (std::cosh(alpha / 2.0) - std::cosh(alpha / 2.0 - alpha * ra));
  return sum / z * factor + 1.0 / (1.0 - std::exp(alpha * (1.0 - ra)));
}

double enrichment_factor(const RankedLibrary& ranked, double delta_pct) {
  std::size_t N = ranked.size();
  std::size_t n_act = ranked.active_count();
  if (N == 0) throw DataError("enrichment_factor: empty library");
  if (n_act == 0) throw DataError("enrichment_factor: no actives");
  if (!(delta_pct > 0.0 && delta_pct <= 100.0))
    throw ConfigError("enrichment_factor: delta_pct must be in (0, 100]");

  std::size_t k = static_cast<std::size_t>(
      std::ceil(delta_pct * static_cast<double>(N) / 100.0));
  k = std::min(std::max<std::size_t>(k, 1), N);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (ranked.entries[i].is_active) ++hits;
  return static_cast<double>(hits) * static_cast<double>(N) /
         (static_cast<double>(k) * static_cast<double>(n_act));
}

double auroc(const RankedLibrary& ranked) {
  std::size_t N = ranked.size();
  std::size_t n_act = ranked.active_count();
  std::size_t n_dec = N - n_act;
  if (n_act == 0 || n_dec == 0)
    throw DataError("auroc: needs both actives and decoys");

  // Ascending-score midranks; equal scores share the group's average rank.
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranked.entries[a].score < ranked.entries[b].score;
  });
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < N) {
    std::size_t j = i;
    while (j < N &&
           ranked.entries[order[j]].score == ranked.entries[order[i]].score)
      ++j;
    double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t q = i; q < j; ++q)
      if (ranked.entries[order[q]].is_active) rank_sum += mid;
    i = j;
  }
  double u = rank_sum - static_cast<double>(n_act) *
                            (static_cast<double>(n_act) + 1.0) / 2.0;
  return u / (static_cast<double>(n_act) * static_cast<double>(n_dec));
}

// ---- screening ---------------------------------------------------------------

RankedLibrary screen_annotated(const ScreeningTarget& target, const Pocket& pocket,
                               const ModelParams& params, const PocketConfig& pcfg) {
  if (target.library.empty()) throw DataError("screen_annotated: empty library");
  if (!pocket.valid()) throw DataError("screen_annotated: empty pocket");

  Pocket crop = crop_enlarged(target.structure, pocket.center, pcfg);
  EncItem item = pocket_item(target.structure, crop);
  Embedding ep = encode(params.pocket_encoder, item.atoms, item.center);

  std::vector<RankedEntry> entries;
  entries.reserve(target.library.size());
  for (const LigandConformer& lig : target.library) {
    Embedding el = encode_ligand(params, lig);
    entries.push_back({lig.id, pair_score(params, ep, el),
                       lig.activity_label == ActivityLabel::active});
  }
  return make_ranked(std::move(entries));
}

RankedLibrary screen_blind(const ScreeningTarget& target,
                           const std::vector<Cavity>& cavities,
                           const ModelParams& params, const PocketConfig& pcfg,
                           ScreenMode mode) {
  if (target.library.empty()) throw DataError("screen_blind: empty library");
  if (cavities.empty()) throw DataError("screen_blind: no candidate cavities");

  std::vector<Embedding> ec;
  ec.reserve(cavities.size());
  for (const Cavity& c : cavities) {
    Pocket crop = crop_enlarged(target.structure, c.center, pcfg);
    EncItem item = pocket_item(target.structure, crop);
    ec.push_back(encode(params.cavity_encoder(), item.atoms, item.center));
  }

  std::vector<RankedEntry> entries;
  entries.reserve(target.library.size());
  for (const LigandConformer& lig : target.library) {
    Embedding el = encode_ligand(params, lig);
    double score;
    if (mode == ScreenMode::max_pool) {
      score = pair_score(params, ec[0], el);
      for (std::size_t s = 1; s < ec.size(); ++s)
        score = std::max(score, pair_score(params, ec[s], el));
    } else {
      std::vector<double> q = project_ligand(el, params.adapter);
      Attention att = attention(q, ec, params.adapter);
      double d = simd::kernels().dot(att.aggregated.data(), q.data(), q.size());
      score = params.loss.t() * d + params.loss.b;
    }
    entries.push_back({lig.id, score,
                       lig.activity_label == ActivityLabel::active});
  }
  return make_ranked(std::move(entries));
}

// ---- pocket identification ---------------------------------------------------

void pocket_id_accumulate(const ProteinStructure& structure,
                          const std::vector<Cavity>& cavities,
                          const std::vector<LigandConformer>& holo_ligands,
                          const ModelParams& params, const PocketConfig& pcfg,
                          PocketIdCounts& acc) {
  if (holo_ligands.empty()) throw DataError("pocket_id: no holo ligands");
  std::size_t S = cavities.size();
  std::size_t n = holo_ligands.size();

  std::vector<Embedding> ec;
  ec.reserve(S);
  for (const Cavity& c : cavities) {
    Pocket crop = crop_enlarged(structure, c.center, pcfg);
    EncItem item = pocket_item(structure, crop);
    ec.push_back(encode(params.cavity_encoder(), item.atoms, item.center));
  }

  for (const LigandConformer& lig : holo_ligands) {
    ++acc.cases;
    if (S == 0) continue;  // every threshold records a miss

    std::vector<double> d(S);
    for (std::size_t s = 0; s < S; ++s) d[s] = dca(cavities[s].center, lig);

    Embedding el = encode_ligand(params, lig);
    std::vector<std::size_t> model_order(S), ideal_order(S);
    std::iota(model_order.begin(), model_order.end(), 0);
    ideal_order = model_order;
    std::vector<double> score(S);
    for (std::size_t s = 0; s < S; ++s) score[s] = pair_score(params, ec[s], el);
    std::stable_sort(model_order.begin(), model_order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    std::stable_sort(ideal_order.begin(), ideal_order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    std::size_t top = std::min(n, S);
    for (std::size_t t = 0; t < kPocketIdThresholds.size(); ++t) {
      double thr = kPocketIdThresholds[t];
      if (d[model_order[0]] <= thr) ++acc.top1_model[t];
      if (d[ideal_order[0]] <= thr) ++acc.top1_ideal[t];
      for (std::size_t r = 0; r < top; ++r)
        if (d[model_order[r]] <= thr) {
          ++acc.topn_model[t];
          break;
        }
      for (std::size_t r = 0; r < top; ++r)
        if (d[ideal_order[r]] <= thr) {
          ++acc.topn_ideal[t];
          break;
        }
    }
  }
}

// ---- aggregation -------------------------------------------------------------

MetricsReport make_metrics_report(const std::map<std::string, TargetMetrics>& per_target) {
  if (per_target.empty()) throw DataError("metrics report: no targets");
  MetricsReport r;
  r.per_target = per_target;
  double n = static_cast<double>(per_target.size());
  for (const auto& [id, m] : per_target) {
    r.averages.auroc += m.auroc;
    r.averages.bedroc += m.bedroc;
    r.averages.ef1 += m.ef1;
  }
  r.averages.auroc /= n;
  r.averages.bedroc /= n;
  r.averages.ef1 /= n;
  return r;
}

std::string metrics_to_csv(const MetricsReport& report) {
  std::string out = "target_id,auroc,bedroc,ef1\n";
  char buf[160];
  auto row = [&](const std::string& id, const TargetMetrics& m) {
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g,%.10g\n", id.c_str(),
                  m.auroc, m.bedroc, m.ef1);
    out += buf;
  };
  for (const auto& [id, m] : report.per_target) row(id, m);
  row("mean", report.averages);
  return out;
}

}  // namespace pocketscreen
