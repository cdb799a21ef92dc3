// SPDX-License-Identifier: Apache-2.0
//
// Ranking metrics against independent long-double oracles, screening-path
// equivalences, and pocket identification counting.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/metrics.hpp"
#include "pocketscreen/rng.hpp"

using namespace pocketscreen;

namespace {

// Direct long-double evaluation of the early-recognition formula on an
// already-ranked library.
long double oracle_bedroc(const RankedLibrary& r, long double alpha) {
  long double N = static_cast<long double>(r.size());
  long double n_act = static_cast<long double>(r.active_count());
  long double ra = n_act / N;
  long double sum = 0.0L;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r.entries[i].is_active)
      sum += std::exp(-alpha * static_cast<long double>(i + 1) / N);
  long double z = ra * (1.0L - std::exp(-alpha)) / (std::exp(alpha / N) - 1.0L);
  long double factor =
      ra * std::sinh(alpha / 2.0L) /
      (std::cosh(alpha / 2.0L) - std::cosh(alpha / 2.0L - alpha * ra));
  return sum / z * factor + 1.0L / (1.0L - std::exp(alpha * (1.0L - ra)));
}

long double oracle_ef(const RankedLibrary& r, long double delta_pct) {
  long double N = static_cast<long double>(r.size());
  std::size_t k = static_cast<std::size_t>(
      std::ceil(delta_pct * N / 100.0L));
  k = std::min(std::max<std::size_t>(k, 1), r.size());
  long double hits = 0.0L;
  for (std::size_t i = 0; i < k; ++i)
    if (r.entries[i].is_active) hits += 1.0L;
  long double n_act = static_cast<long double>(r.active_count());
  return hits * N / (static_cast<long double>(k) * n_act);
}

// Pairwise counting with half credit for ties; a different algorithm than the
// rank-sum implementation.
long double oracle_auroc(const RankedLibrary& r) {
  long double wins = 0.0L, pairs = 0.0L;
  for (const RankedEntry& a : r.entries) {
    if (!a.is_active) continue;
    for (const RankedEntry& d : r.entries) {
      if (d.is_active) continue;
      pairs += 1.0L;
      if (a.score > d.score)
        wins += 1.0L;
      else if (a.score == d.score)
        wins += 0.5L;
    }
  }
  return wins / pairs;
}

RankedLibrary random_library(Rng& rng, bool tie_heavy) {
  std::size_t n = 2 + rng.below(499);
  std::size_t n_act = 1 + rng.below(n - 1);
  std::vector<RankedEntry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i].ligand_id = "m" + std::to_string(i);
    entries[i].is_active = i < n_act;
    entries[i].score =
        tie_heavy ? static_cast<double>(rng.below(20)) * 0.25 : rng.uniform(-5, 5);
  }
  rng.shuffle(entries);
  return make_ranked(std::move(entries));
}

RankedLibrary library_with_active_ranks(std::size_t n,
                                        const std::vector<std::size_t>& active_ranks) {
  std::vector<RankedEntry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i].ligand_id = "m" + std::to_string(i);
    entries[i].score = static_cast<double>(n - i);
    entries[i].is_active =
        std::find(active_ranks.begin(), active_ranks.end(), i + 1) !=
        active_ranks.end();
  }
  return make_ranked(std::move(entries));
}

}  // namespace

TEST_CASE("make_ranked sorts descending and keeps ties in input order") {
  std::vector<RankedEntry> in = {{"a", 1.0, false}, {"b", 2.0, true},
                                 {"c", 2.0, false}};
  RankedLibrary r = make_ranked(in);
  REQUIRE(r.size() == 3);
  CHECK(r.entries[0].ligand_id == "b");
  CHECK(r.entries[1].ligand_id == "c");
  CHECK(r.entries[2].ligand_id == "a");
  CHECK(r.active_count() == 1);
}

TEST_CASE("metrics agree with long-double oracles on random libraries") {
  Rng rng(101);
  const double deltas[] = {0.5, 1.0, 5.0, 20.0, 100.0};
  for (int rep = 0; rep < 500; ++rep) {
    RankedLibrary r = random_library(rng, rep % 3 == 0);
    double b = bedroc(r);
    CHECK(std::abs(static_cast<long double>(b) - oracle_bedroc(r, 80.5L)) <= 1e-9L);
    double a = auroc(r);
    CHECK(std::abs(static_cast<long double>(a) - oracle_auroc(r)) <= 1e-9L);
    double delta = deltas[rep % 5];
    double e = enrichment_factor(r, delta);
    CHECK(std::abs(static_cast<long double>(e) - oracle_ef(r, delta)) <= 1e-9L);
  }
}

TEST_CASE("bedroc saturates at the rank extremes") {
  RankedLibrary first = library_with_active_ranks(100, {1});
  CHECK(std::abs(bedroc(first) - 1.0) <= 1e-3);
  RankedLibrary last = library_with_active_ranks(100, {100});
  CHECK(bedroc(last) >= 0.0 - 1e-12);
  CHECK(bedroc(last) <= 1e-3);
}

TEST_CASE("bedroc stays within the unit interval") {
  Rng rng(102);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<RankedEntry> entries(50);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      entries[i].ligand_id = "m" + std::to_string(i);
      entries[i].score = static_cast<double>(50 - i);
      entries[i].is_active = i < 7;
    }
    rng.shuffle(entries);
    // Re-score by position so the shuffle decides the ranking.
    for (std::size_t i = 0; i < entries.size(); ++i)
      entries[i].score = static_cast<double>(50 - i);
    double b = bedroc(make_ranked(entries));
    CHECK(b >= -1e-12);
    CHECK(b <= 1.0 + 1e-12);
  }
}

TEST_CASE("metrics are invariant under monotone score transforms") {
  Rng rng(103);
  for (int rep = 0; rep < 50; ++rep) {
    RankedLibrary base = random_library(rng, rep % 4 == 0);
    auto transformed = base.entries;
    for (auto& e : transformed)
      e.score = rep % 2 == 0 ? 3.0 * e.score + 7.0 : std::exp(e.score * 0.5);
    RankedLibrary t = make_ranked(transformed);
    CHECK(bedroc(t) == doctest::Approx(bedroc(base)).epsilon(1e-12));
    CHECK(auroc(t) == doctest::Approx(auroc(base)).epsilon(1e-12));
    CHECK(enrichment_factor(t, 2.0) ==
          doctest::Approx(enrichment_factor(base, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("enrichment factor hand cases") {
  // N=100, 2 actives, the top entry active: k=1, EF = (1/1)/(2/100) = 50.
  RankedLibrary top = library_with_active_ranks(100, {1, 90});
  CHECK(enrichment_factor(top, 1.0) == doctest::Approx(50.0).epsilon(1e-12));

  // N=150 at 1%: k = ceil(1.5) = 2. One active in the top 2 of 3 total:
  // EF = 1*150/(2*3) = 25 (a k=1 cutoff would give 50).
  RankedLibrary ceilcase = library_with_active_ranks(150, {1, 100, 120});
  CHECK(enrichment_factor(ceilcase, 1.0) == doctest::Approx(25.0).epsilon(1e-12));

  // Actives ranked last: no hits in the cutoff.
  RankedLibrary worst = library_with_active_ranks(100, {99, 100});
  CHECK(enrichment_factor(worst, 1.0) == doctest::Approx(0.0));

  // Full-library cutoff is always 1.
  CHECK(enrichment_factor(top, 100.0) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(enrichment_factor(top, 0.0), ConfigError);
  CHECK_THROWS_AS(enrichment_factor(top, -1.0), ConfigError);
  CHECK_THROWS_AS(enrichment_factor(top, 100.5), ConfigError);
  RankedLibrary none = library_with_active_ranks(10, {});
  CHECK_THROWS_AS(enrichment_factor(none, 1.0), DataError);
  RankedLibrary empty;
  CHECK_THROWS_AS(enrichment_factor(empty, 1.0), DataError);
}

TEST_CASE("auroc hand cases") {
  CHECK(auroc(library_with_active_ranks(10, {1, 2, 3})) == doctest::Approx(1.0));
  CHECK(auroc(library_with_active_ranks(10, {8, 9, 10})) == doctest::Approx(0.0));

  std::vector<RankedEntry> tied = {{"a", 1.0, true}, {"b", 1.0, false}};
  CHECK(auroc(make_ranked(tied)) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<RankedEntry> flat(8);
  for (std::size_t i = 0; i < flat.size(); ++i)
    flat[i] = {"m" + std::to_string(i), 2.5, i % 2 == 0};
  CHECK(auroc(make_ranked(flat)) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(auroc(library_with_active_ranks(5, {1, 2, 3, 4, 5})), DataError);
  CHECK_THROWS_AS(auroc(library_with_active_ranks(5, {})), DataError);
  CHECK_THROWS_AS(bedroc(library_with_active_ranks(5, {})), DataError);
  CHECK_THROWS_AS(bedroc(library_with_active_ranks(8, {1}), 0.0), ConfigError);
}

namespace {

ScreeningTarget little_target(Rng& rng) {
  ScreeningTarget t;
  t.target_id = "T";
  t.structure.id = "T";
  const char* elems[] = {"C", "N", "O", "S"};
  auto add_cluster = [&](const Vec3& around, int count) {
    for (int i = 0; i < count; ++i) {
      Atom a;
      a.element = elems[rng.below(4)];
      a.position = around + Vec3{rng.uniform(-4, 4), rng.uniform(-4, 4),
                                 rng.uniform(-4, 4)};
      a.residue_index = static_cast<int>(t.structure.residues.size());
      Residue r;
      r.chain_id = 'A';
      r.seq_num = static_cast<int>(t.structure.residues.size()) + 1;
      r.atom_indices.push_back(static_cast<int>(t.structure.atoms.size()));
      t.structure.atoms.push_back(a);
      t.structure.residues.push_back(r);
    }
  };
  add_cluster({0, 0, 0}, 30);
  add_cluster({30, 0, 0}, 25);

  for (int i = 0; i < 4; ++i) {
    LigandConformer lig;
    lig.id = "m" + std::to_string(i);
    lig.activity_label = i == 0 ? ActivityLabel::active : ActivityLabel::decoy;
    int n = 3 + static_cast<int>(rng.below(4));
    for (int a = 0; a < n; ++a) {
      Atom atom;
      atom.element = elems[rng.below(4)];
      atom.position = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
      lig.atoms.push_back(atom);
    }
    t.library.push_back(std::move(lig));
  }
  return t;
}

Cavity cavity_at(const Vec3& c) {
  Cavity cav;
  cav.center = c;
  cav.probe_points = {c, c + Vec3{1, 0, 0}};
  cav.size_score = 2;
  return cav;
}

std::map<std::string, double> score_map(const RankedLibrary& r) {
  std::map<std::string, double> m;
  for (const RankedEntry& e : r.entries) m[e.ligand_id] = e.score;
  return m;
}

}  // namespace

TEST_CASE("single-cavity blind screening equals annotated screening") {
  Rng rng(201);
  ScreeningTarget t = little_target(rng);
  ModelParams params = init_model(EncoderSizes{}, 77);
  PocketConfig pcfg;

  Cavity c = cavity_at({0.5, -0.5, 0.25});
  Pocket annotated;
  annotated.center = c.center;
  annotated.atom_indices = {0};  // only the center matters for the crop

  auto sa = score_map(screen_annotated(t, annotated, params, pcfg));
  auto sm = score_map(screen_blind(t, {c}, params, pcfg, ScreenMode::max_pool));
  // Identity adapter: projection and aggregation are both no-ops.
  auto sd = score_map(screen_blind(t, {c}, params, pcfg, ScreenMode::adapter));
  REQUIRE(sa.size() == sm.size());
  for (const auto& [id, score] : sa) {
    CHECK(sm.at(id) == score);
    CHECK(sd.at(id) == score);
  }
}

TEST_CASE("max-pool scores never decrease when cavities are added") {
  Rng rng(202);
  ScreeningTarget t = little_target(rng);
  ModelParams params = init_model(EncoderSizes{}, 78);
  PocketConfig pcfg;
  Cavity c1 = cavity_at({0, 0, 0});
  Cavity c2 = cavity_at({30, 0, 0});

  auto one = score_map(screen_blind(t, {c1}, params, pcfg, ScreenMode::max_pool));
  auto both =
      score_map(screen_blind(t, {c1, c2}, params, pcfg, ScreenMode::max_pool));
  for (const auto& [id, score] : one) CHECK(both.at(id) >= score);
}

TEST_CASE("screening validates its inputs") {
  Rng rng(203);
  ScreeningTarget t = little_target(rng);
  ModelParams params = init_model(EncoderSizes{}, 79);
  PocketConfig pcfg;
  Pocket empty_pocket;
  empty_pocket.center = {0, 0, 0};
  CHECK_THROWS_AS(screen_annotated(t, empty_pocket, params, pcfg), DataError);
  CHECK_THROWS_AS(screen_blind(t, {}, params, pcfg, ScreenMode::max_pool),
                  DataError);
  ScreeningTarget bare = t;
  bare.library.clear();
  Pocket p;
  p.center = {0, 0, 0};
  p.atom_indices = {0};
  CHECK_THROWS_AS(screen_annotated(bare, p, params, pcfg), DataError);
}

TEST_CASE("pocket identification counts hits per threshold") {
  Rng rng(204);
  ScreeningTarget t = little_target(rng);
  ModelParams params = init_model(EncoderSizes{}, 80);
  PocketConfig pcfg;

  LigandConformer holo;
  holo.id = "holo";
  holo.atoms.resize(1);
  holo.atoms[0].element = "C";
  holo.atoms[0].position = {2.5, 0, 0};

  // One cavity at the origin: model and ideal rankings coincide, and the
  // distance to the ligand is exactly 2.5.
  PocketIdCounts acc;
  pocket_id_accumulate(t.structure, {cavity_at({0, 0, 0})}, {holo}, params, pcfg,
                       acc);
  CHECK(acc.cases == 1);
  // thresholds 1,2 miss; 3,4 hit
  CHECK(acc.top1_model == std::array<long, 4>{0, 0, 1, 1});
  CHECK(acc.top1_ideal == std::array<long, 4>{0, 0, 1, 1});
  CHECK(acc.topn_model == std::array<long, 4>{0, 0, 1, 1});
  CHECK(acc.topn_ideal == std::array<long, 4>{0, 0, 1, 1});
  CHECK(acc.rate(acc.top1_model, 2) == doctest::Approx(1.0));

  // Ideal ranking puts the near cavity first regardless of the model score.
  PocketIdCounts two;
  pocket_id_accumulate(t.structure,
                       {cavity_at({30, 0, 0}), cavity_at({0, 0, 0})}, {holo},
                       params, pcfg, two);
  CHECK(two.top1_ideal == std::array<long, 4>{0, 0, 1, 1});

  // Zero cavities: a counted miss, not an error.
  PocketIdCounts none;
  pocket_id_accumulate(t.structure, {}, {holo}, params, pcfg, none);
  CHECK(none.cases == 1);
  CHECK(none.top1_model == std::array<long, 4>{0, 0, 0, 0});
  CHECK(none.rate(none.top1_model, 3) == doctest::Approx(0.0));

  CHECK_THROWS_AS(pocket_id_accumulate(t.structure, {}, {}, params, pcfg, none),
                  DataError);
}

TEST_CASE("metrics reports aggregate unweighted means and serialize") {
  std::map<std::string, TargetMetrics> per;
  per["T00"] = {0.5, 0.25, 1.0};
  per["T01"] = {1.0, 0.75, 3.0};
  MetricsReport rep = make_metrics_report(per);
  CHECK(rep.averages.auroc == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rep.averages.bedroc == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rep.averages.ef1 == doctest::Approx(2.0).epsilon(1e-12));

  std::string csv = metrics_to_csv(rep);
  CHECK(csv ==
        "target_id,auroc,bedroc,ef1\n"
        "T00,0.5,0.25,1\n"
        "T01,1,0.75,3\n"
        "mean,0.75,0.5,2\n");

  CHECK_THROWS_AS(make_metrics_report({}), DataError);
}
