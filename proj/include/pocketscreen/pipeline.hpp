// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pocketscreen/cavity.hpp"
#include "pocketscreen/metrics.hpp"
#include "pocketscreen/objectives.hpp"
#include "pocketscreen/pocketlabel.hpp"
#include "pocketscreen/synth.hpp"

namespace pocketscreen {

// Everything a run needs, parsed from a flat key=value file. Unknown keys are
// rejected; every key has a default, and the resolved values are echoed into
// every report so runs stay attributable.
struct RunConfig {
  DetectorConfig detector;
  PocketConfig pocket;
  LabelConfig label;
  ObjectiveConfig objective;
  EncoderSizes enc;
  SyntheticWorldSpec synth;
  std::string data_dir = "data";
  std::string out_dir = "out";
  std::string setting = "blind";  // oracle | annotated | blind
  std::string mode = "max_pool";  // max_pool | adapter (blind only)
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);  // empty path -> defaults
nlohmann::json config_echo(const RunConfig& cfg);

// Per-target intermediates shared by every stage: detected cavities, the
// ligand-derived reference pocket, labels, and encoder-ready crops.
struct PreparedTarget {
  std::vector<Cavity> cavities;
  Pocket holo;
  std::vector<LabeledCavity> labeled;  // parallel to cavities
  TargetBundle bundle;
};

PreparedTarget prepare_target(const ScreeningTarget& target, const RunConfig& cfg);

struct PreparedWorld {
  World world;
  std::vector<PreparedTarget> prepared;  // parallel to world.targets
  std::vector<int> train_idx, val_idx, test_idx;
};

// Loads cfg.data_dir and prepares every target.
PreparedWorld prepare_world(const RunConfig& cfg);

// Complexes: per train/val target, the holo ligand plus every active, all
// sharing the target's reference pocket.
AlignDataset build_align_dataset(const PreparedWorld& pw);

// Frozen embeddings plus one-hot (best-IoU cavity) and soft (frozen-model
// softmax) supervision per complex. Targets with no detected cavity drop out.
AdapterDataset build_adapter_dataset(const PreparedWorld& pw,
                                     const ModelParams& params);

// Screens the held-out test targets under one setting and computes per-target
// metrics. `scores_out`, if given, receives the ranked libraries as JSON.
MetricsReport evaluate_setting(const PreparedWorld& pw, const ModelParams& params,
                               const RunConfig& cfg, const std::string& setting,
                               const std::string& mode,
                               nlohmann::json* scores_out = nullptr);

PocketIdCounts pocket_id_stage(const PreparedWorld& pw, const ModelParams& params,
                               const RunConfig& cfg);

// Fraction of held-out complexes whose argmax attention weight lands on a
// cavity within tol_A of the planted binding center.
double adapter_binding_rate(const PreparedWorld& pw, const ModelParams& params,
                            double tol_A = 2.0);

nlohmann::json pocket_id_json(const PocketIdCounts& acc);
std::string pocket_id_csv(const PocketIdCounts& acc);
nlohmann::json metrics_json(const MetricsReport& report);
nlohmann::json cavities_json(const PreparedWorld& pw);
nlohmann::json labels_json(const PreparedWorld& pw);
nlohmann::json trace_json(const TrainTrace& trace);

// Full deterministic pipeline: generate, detect, label, train both phases,
// screen all settings, pocket-id, and write every report under cfg.out_dir.
void run_pipeline(const RunConfig& cfg);

}  // namespace pocketscreen
