// SPDX-License-Identifier: Apache-2.0
//
// Synthetic world generation, end-to-end pipeline determinism, and CLI exit
// codes. CLI cases run only when POCKETSCREEN_BIN points at the built binary.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "pocketscreen/cavity.hpp"
#include "pocketscreen/errors.hpp"
#include "pocketscreen/jsonio.hpp"
#include "pocketscreen/pipeline.hpp"
#include "pocketscreen/synth.hpp"

using namespace pocketscreen;
namespace fs = std::filesystem;

namespace {

SyntheticWorldSpec micro_spec() {
  SyntheticWorldSpec spec;
  spec.n_targets = 3;
  spec.actives_per_target = 2;
  spec.decoys_per_target = 8;
  spec.seed = 1;
  return spec;
}

std::string fresh_dir(const std::string& name) {
  std::string path = "/tmp/pocketscreen_tests/" + name;
  fs::remove_all(path);
  fs::create_directories(path);
  return path;
}

}  // namespace

TEST_CASE("world generation is byte-identical across runs") {
  SyntheticWorldSpec spec = micro_spec();
  std::string d1 = fresh_dir("gen_a");
  std::string d2 = fresh_dir("gen_b");
  gen_synthetic(spec, d1);
  gen_synthetic(spec, d2);

  for (const char* rel : {"manifest.json", "proteins/T00.pdb", "proteins/T02.pdb",
                          "ligands/T01.jsonl", "holo/T00.jsonl"}) {
    CHECK(read_file(d1 + "/" + std::string(rel)) ==
          read_file(d2 + "/" + std::string(rel)));
  }

  // A different seed changes the world.
  SyntheticWorldSpec other = spec;
  other.seed = 2;
  std::string d3 = fresh_dir("gen_c");
  gen_synthetic(other, d3);
  CHECK(read_file(d1 + "/proteins/T00.pdb") != read_file(d3 + "/proteins/T00.pdb"));
}

TEST_CASE("generated worlds load back with consistent geometry") {
  SyntheticWorldSpec spec = micro_spec();
  std::string dir = fresh_dir("gen_load");
  gen_synthetic(spec, dir);
  World w = load_world(dir);

  REQUIRE(w.targets.size() == 3);
  REQUIRE(w.info.size() == 3);
  CHECK(w.info[0].split == "train");
  CHECK(w.info[1].split == "val");
  CHECK(w.info[2].split == "test");

  for (std::size_t t = 0; t < w.targets.size(); ++t) {
    const TargetInfo& info = w.info[t];
    const ScreeningTarget& tgt = w.targets[t];
    CHECK(tgt.target_id == info.target_id);
    REQUIRE(tgt.holo_ligand.has_value());
    CHECK(tgt.library.size() == 10);
    std::size_t n_act = 0;
    for (const LigandConformer& lig : tgt.library)
      if (lig.activity_label == ActivityLabel::active) ++n_act;
    CHECK(n_act == 2);

    REQUIRE(!info.void_centers.empty());
    CHECK(info.void_centers.size() >= 3);
    CHECK(info.void_centers.size() <= 6);
    CHECK(dist(info.binding_center, info.void_centers[0]) <= 1e-9);
    for (std::size_t i = 0; i < info.void_centers.size(); ++i) {
      double r = norm(info.void_centers[i]);
      CHECK(r >= 13.2 - 1e-9);
      CHECK(r <= 14.5 + 1e-9);
      for (std::size_t j = i + 1; j < info.void_centers.size(); ++j)
        CHECK(dist(info.void_centers[i], info.void_centers[j]) >= 18.5 - 1e-9);
    }

    // Alphabet code is shared by actives: every active carries at least one
    // atom of a code element.
    for (const LigandConformer& lig : tgt.library) {
      if (lig.activity_label != ActivityLabel::active) continue;
      bool has_code_elem = false;
      for (const Atom& a : lig.atoms)
        if (a.element.size() == 1 && (a.element[0] == info.code[0] ||
                                      a.element[0] == info.code[1]))
          has_code_elem = true;
      CHECK(has_code_elem);
    }
  }

  CHECK_THROWS_AS(load_world("/tmp/pocketscreen_tests/does_not_exist"), DataError);
}

TEST_CASE("the detector recovers the planted voids") {
  SyntheticWorldSpec spec = micro_spec();
  std::string dir = fresh_dir("gen_detect");
  gen_synthetic(spec, dir);
  World w = load_world(dir);
  DetectorConfig cfg;
  for (std::size_t t = 0; t < w.targets.size(); ++t) {
    auto cavities = detect_cavities(w.targets[t].structure, cfg);
    for (const Vec3& vc : w.info[t].void_centers) {
      double best = 1e300;
      for (const Cavity& c : cavities) best = std::min(best, dist(c.center, vc));
      CHECK(best <= 2.0);
    }
  }
}

TEST_CASE("the full pipeline writes identical reports on a rerun") {
  RunConfig cfg;
  cfg.synth = micro_spec();
  cfg.objective.max_epochs = 2;
  cfg.objective.batch_size = 4;
  cfg.data_dir = fresh_dir("pipe_data");
  cfg.out_dir = fresh_dir("pipe_out");

  run_pipeline(cfg);
  const char* artifacts[] = {
      "checkpoint.json",   "adapter_checkpoint.json", "align_trace.json",
      "adapter_trace.json", "cavities.json",          "labels.json",
      "scores_oracle.json", "scores_annotated.json",  "scores_blind_max_pool.json",
      "scores_blind_adapter.json", "metrics.csv",     "pocket_id.csv",
      "report.json"};
  std::vector<std::string> first;
  for (const char* rel : artifacts)
    first.push_back(read_file(cfg.out_dir + "/" + std::string(rel)));

  run_pipeline(cfg);
  for (std::size_t i = 0; i < first.size(); ++i) {
    INFO(artifacts[i]);
    CHECK(read_file(cfg.out_dir + "/" + std::string(artifacts[i])) == first[i]);
  }
}

namespace {

bool have_cli() { return std::getenv("POCKETSCREEN_BIN") != nullptr; }

int run_cli(const std::string& args) {
  std::string cmd = std::string(std::getenv("POCKETSCREEN_BIN")) + " " + args +
                    " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("cli reports usage errors with exit code 2") {
  if (!have_cli()) {
    MESSAGE("POCKETSCREEN_BIN not set; skipping CLI cases");
    return;
  }
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("gen-synth --help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);

  std::string dir = fresh_dir("cli_badcfg");
  write_file(dir + "/bad.conf", "no_such_key = 1\n");
  CHECK(run_cli("detect --config " + dir + "/bad.conf") == 2);
  write_file(dir + "/badval.conf", "max_epochs = soon\n");
  CHECK(run_cli("detect --config " + dir + "/badval.conf") == 2);
}

TEST_CASE("cli distinguishes data errors from usage errors") {
  if (!have_cli()) {
    MESSAGE("POCKETSCREEN_BIN not set; skipping CLI cases");
    return;
  }
  CHECK(run_cli("eval --config /tmp/pocketscreen_tests/missing.conf") == 3);

  std::string dir = fresh_dir("cli_nodata");
  write_file(dir + "/run.conf", "data_dir = " + dir + "/nowhere\n");
  CHECK(run_cli("detect --config " + dir + "/run.conf") == 3);
}

TEST_CASE("cli gen-synth writes a loadable world") {
  if (!have_cli()) {
    MESSAGE("POCKETSCREEN_BIN not set; skipping CLI cases");
    return;
  }
  std::string dir = fresh_dir("cli_gen");
  write_file(dir + "/gen.conf",
             "n_targets = 3\nactives_per_target = 2\ndecoys_per_target = 8\n"
             "data_dir = " + dir + "/data\n");
  CHECK(run_cli("gen-synth --config " + dir + "/gen.conf") == 0);
  World w = load_world(dir + "/data");
  CHECK(w.targets.size() == 3);
}
