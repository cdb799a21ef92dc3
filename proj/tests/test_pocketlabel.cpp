// SPDX-License-Identifier: Apache-2.0
//
// Overlap ratios, cavity labeling, training-step sampling, and
// distance-to-closest-atom tests.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/pocketlabel.hpp"
#include "pocketscreen/rng.hpp"

using namespace pocketscreen;

namespace {

Pocket pocket_with_keys(std::vector<int> seqs) {
  Pocket p;
  for (int s : seqs) p.residue_keys.emplace_back('A', s);
  std::sort(p.residue_keys.begin(), p.residue_keys.end());
  // Any non-empty index list marks the pocket usable.
  for (std::size_t i = 0; i < seqs.size(); ++i)
    p.atom_indices.push_back(static_cast<int>(i));
  return p;
}

LabeledCavity precursor_with_keys(std::vector<int> seqs) {
  LabeledCavity lc;
  lc.pocket = pocket_with_keys(std::move(seqs));
  lc.pocket.source = PocketSource::cavity;
  lc.cavity.probe_points.push_back({0, 0, 0});
  lc.cavity.size_score = 1;
  return lc;
}

}  // namespace

TEST_CASE("iou and coverage match the worked examples") {
  Pocket a = pocket_with_keys({1, 2, 3});
  Pocket b = pocket_with_keys({2, 3, 4});
  CHECK(iou(a, b) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(iou(b, a) == doctest::Approx(0.5).epsilon(1e-12));

  Pocket holo = pocket_with_keys({1, 2, 3, 4});
  Pocket cav = pocket_with_keys({3, 4, 9});
  CHECK(coverage(holo, cav) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(coverage(holo, holo) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("iou and coverage match brute-force set arithmetic") {
  Rng rng(31);
  for (int rep = 0; rep < 1000; ++rep) {
    std::set<int> sa, sb;
    std::size_t na = 1 + rng.below(12), nb = rng.below(12);
    for (std::size_t i = 0; i < na; ++i) sa.insert(static_cast<int>(rng.below(20)));
    for (std::size_t i = 0; i < nb; ++i) sb.insert(static_cast<int>(rng.below(20)));
    Pocket a = pocket_with_keys({sa.begin(), sa.end()});
    Pocket b = pocket_with_keys({sb.begin(), sb.end()});

    std::set<int> inter, uni = sa;
    for (int v : sa)
      if (sb.count(v)) inter.insert(v);
    uni.insert(sb.begin(), sb.end());

    double want_iou =
        static_cast<double>(inter.size()) / static_cast<double>(uni.size());
    CHECK(iou(a, b) == doctest::Approx(want_iou).epsilon(1e-12));
    CHECK(iou(a, b) == doctest::Approx(iou(b, a)).epsilon(1e-12));
    double want_cov =
        static_cast<double>(inter.size()) / static_cast<double>(sa.size());
    CHECK(coverage(a, b) == doctest::Approx(want_cov).epsilon(1e-12));
  }
}

TEST_CASE("iou and coverage reject empty reference sides") {
  Pocket empty;
  Pocket full = pocket_with_keys({1});
  CHECK_THROWS_AS(iou(empty, empty), DataError);
  CHECK(iou(full, empty) == doctest::Approx(0.0));
  CHECK_THROWS_AS(coverage(empty, full), DataError);
}

TEST_CASE("label_cavities applies the two-threshold partition") {
  Pocket holo = pocket_with_keys({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  std::vector<LabeledCavity> pre;
  pre.push_back(precursor_with_keys({1, 2, 3, 4, 5, 6, 11, 12}));  // iou 6/12
  pre.push_back(precursor_with_keys({11}));                        // iou 0/11
  pre.push_back(precursor_with_keys({1, 2, 3, 11, 12, 13}));      // iou 3/13
  LabelConfig cfg;
  auto labeled = label_cavities(holo, pre, cfg);
  REQUIRE(labeled.size() == 3);
  CHECK(labeled[0].iou == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(labeled[0].label == CavityLabel::positive);
  CHECK(labeled[1].iou == doctest::Approx(0.0));
  CHECK(labeled[1].label == CavityLabel::negative);
  CHECK(labeled[2].iou == doctest::Approx(3.0 / 13.0).epsilon(1e-12));
  CHECK(labeled[2].label == CavityLabel::ignore);
  CHECK(labeled[0].coverage == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("labels are exhaustive and consistent with the thresholds") {
  Rng rng(8);
  LabelConfig cfg;
  Pocket holo = pocket_with_keys({1, 2, 3, 4, 5});
  for (int rep = 0; rep < 300; ++rep) {
    std::set<int> keys;
    std::size_t n = rng.below(8);
    for (std::size_t i = 0; i < n; ++i) keys.insert(static_cast<int>(rng.below(10)));
    std::vector<LabeledCavity> pre;
    pre.push_back(precursor_with_keys({keys.begin(), keys.end()}));
    auto labeled = label_cavities(holo, pre, cfg);
    const LabeledCavity& lc = labeled[0];
    if (lc.label == CavityLabel::positive) CHECK(lc.iou >= cfg.tau_pos);
    if (lc.label == CavityLabel::negative) CHECK(lc.iou <= cfg.tau_neg);
    if (lc.label == CavityLabel::ignore) {
      CHECK(lc.iou > cfg.tau_neg);
      CHECK(lc.iou < cfg.tau_pos);
    }
  }
}

TEST_CASE("label_cavities validates thresholds and the holo pocket") {
  Pocket holo = pocket_with_keys({1});
  LabelConfig bad;
  bad.tau_pos = 0.1;
  bad.tau_neg = 0.5;
  CHECK_THROWS_AS(label_cavities(holo, {}, bad), ConfigError);
  Pocket invalid;
  LabelConfig cfg;
  CHECK_THROWS_AS(label_cavities(invalid, {}, cfg), DataError);
}

TEST_CASE("an empty cavity pocket labels negative but is never sampled") {
  Pocket holo = pocket_with_keys({1, 2});
  LabeledCavity unreachable;
  unreachable.cavity.probe_points.push_back({50, 50, 50});
  unreachable.cavity.size_score = 1;
  // pocket left empty: no residue within reach
  LabelConfig cfg;
  auto labeled = label_cavities(holo, {unreachable}, cfg);
  CHECK(labeled[0].label == CavityLabel::negative);
  CHECK(labeled[0].iou == 0.0);
  Rng rng(1);
  CavitySample s = sample_training_cavities(labeled, cfg, rng);
  CHECK_FALSE(s.positive.has_value());
  CHECK(s.negatives.empty());
}

TEST_CASE("sample_training_cavities draws one positive and a negative subset") {
  Pocket holo = pocket_with_keys({1, 2, 3, 4});
  std::vector<LabeledCavity> pre;
  pre.push_back(precursor_with_keys({1, 2, 3, 4}));  // positive
  pre.push_back(precursor_with_keys({21}));          // negative
  pre.push_back(precursor_with_keys({22}));          // negative
  pre.push_back(precursor_with_keys({23}));          // negative
  pre.push_back(precursor_with_keys({24}));          // negative
  LabelConfig cfg;  // negative_ratio 0.5 -> ceil(0.5 * 4) = 2
  auto labeled = label_cavities(holo, pre, cfg);

  Rng r1(9), r2(9);
  CavitySample a = sample_training_cavities(labeled, cfg, r1);
  CavitySample b = sample_training_cavities(labeled, cfg, r2);
  REQUIRE(a.positive.has_value());
  CHECK(*a.positive == 0);
  REQUIRE(a.negatives.size() == 2);
  for (std::size_t i : a.negatives) {
    CHECK(i >= 1);
    CHECK(i <= 4);
  }
  CHECK(a.positive == b.positive);
  CHECK(a.negatives == b.negatives);

  LabelConfig bad = cfg;
  bad.negative_ratio = 0.0;
  Rng r3(1);
  CHECK_THROWS_AS(sample_training_cavities(labeled, bad, r3), ConfigError);
}

TEST_CASE("dca is the heavy-atom minimum distance") {
  LigandConformer lig;
  lig.id = "l";
  lig.atoms.resize(3);
  lig.atoms[0].element = "C";
  lig.atoms[0].position = {3, 0, 0};
  lig.atoms[1].element = "O";
  lig.atoms[1].position = {0, 4, 0};
  lig.atoms[2].element = "H";
  lig.atoms[2].position = {0.5, 0, 0};  // closer, but hydrogen is skipped
  CHECK(dca({0, 0, 0}, lig) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(dca({3, 0, 0}, lig) == doctest::Approx(0.0));

  Rng rng(2);
  Vec3 t{1.5, -2.25, 0.5};
  Vec3 c{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
  double base = dca(c, lig);
  LigandConformer moved = lig;
  for (auto& a : moved.atoms) a.position += t;
  CHECK(std::abs(dca(c + t, moved) - base) <= 1e-9);

  LigandConformer h_only;
  h_only.id = "h";
  h_only.atoms.resize(1);
  h_only.atoms[0].element = "H";
  h_only.atoms[0].position = {0, 0, 0};
  CHECK_THROWS_AS(dca({0, 0, 0}, h_only), DataError);
}
