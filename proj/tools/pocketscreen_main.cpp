// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/jsonio.hpp"
#include "pocketscreen/pipeline.hpp"
#include "pocketscreen/simd/kernels.hpp"

namespace ps = pocketscreen;

namespace {

std::string scores_tag(const ps::RunConfig& cfg) {
  return cfg.setting == "blind" ? "blind_" + cfg.mode : cfg.setting;
}

ps::ModelParams load_checkpoint(const std::string& path) {
  return ps::checkpoint_from_json(ps::read_file(path));
}

void cmd_detect(const ps::RunConfig& cfg) {
  ps::PreparedWorld pw = ps::prepare_world(cfg);
  ps::write_file(cfg.out_dir + "/cavities.json",
                 ps::cavities_json(pw).dump(1) + "\n");
}

void cmd_label(const ps::RunConfig& cfg) {
  ps::PreparedWorld pw = ps::prepare_world(cfg);
  ps::write_file(cfg.out_dir + "/labels.json", ps::labels_json(pw).dump(1) + "\n");
}

void cmd_train_align(const ps::RunConfig& cfg) {
  ps::PreparedWorld pw = ps::prepare_world(cfg);
  ps::AlignDataset data = ps::build_align_dataset(pw);
  ps::ModelParams params =
      ps::init_model(cfg.enc, ps::mix_seed(cfg.objective.seed, 1));
  ps::TrainTrace trace = ps::train_align(data, params, cfg.objective, cfg.label);
  ps::write_file(cfg.out_dir + "/checkpoint.json", ps::checkpoint_to_json(params));
  ps::write_file(cfg.out_dir + "/align_trace.json",
                 ps::trace_json(trace).dump(1) + "\n");
}

void cmd_train_adapter(const ps::RunConfig& cfg) {
  ps::PreparedWorld pw = ps::prepare_world(cfg);
  ps::ModelParams params = load_checkpoint(cfg.out_dir + "/checkpoint.json");
  ps::AdapterDataset data = ps::build_adapter_dataset(pw, params);
  ps::TrainTrace trace = ps::train_adapter(data, params, cfg.objective);
  ps::write_file(cfg.out_dir + "/adapter_checkpoint.json",
                 ps::checkpoint_to_json(params));
  ps::write_file(cfg.out_dir + "/adapter_trace.json",
                 ps::trace_json(trace).dump(1) + "\n");
}

void cmd_screen(const ps::RunConfig& cfg) {
  ps::PreparedWorld pw = ps::prepare_world(cfg);
  bool adapter = cfg.setting == "blind" && cfg.mode == "adapter";
  ps::ModelParams params = load_checkpoint(
      cfg.out_dir + (adapter ? "/adapter_checkpoint.json" : "/checkpoint.json"));
  nlohmann::json scores;
  ps::evaluate_setting(pw, params, cfg, cfg.setting, cfg.mode, &scores);
  ps::write_file(cfg.out_dir + "/scores_" + scores_tag(cfg) + ".json",
                 scores.dump(1) + "\n");
}

void cmd_pocket_id(const ps::RunConfig& cfg) {
  ps::PreparedWorld pw = ps::prepare_world(cfg);
  ps::ModelParams params = load_checkpoint(cfg.out_dir + "/checkpoint.json");
  ps::PocketIdCounts acc = ps::pocket_id_stage(pw, params, cfg);
  ps::write_file(cfg.out_dir + "/pocket_id.csv", ps::pocket_id_csv(acc));
}

void cmd_eval(const ps::RunConfig& cfg) {
  std::string path = cfg.out_dir + "/scores_" + scores_tag(cfg) + ".json";
  nlohmann::json scores;
  try {
    scores = nlohmann::json::parse(ps::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ps::ParseError(path + ": " + e.what());
  }
  std::map<std::string, ps::TargetMetrics> per;
  try {
    for (const auto& [id, entries] : scores.at("targets").items()) {
      ps::RankedLibrary rl;
      for (const auto& ej : entries)
        rl.entries.push_back({ej.at("id").get<std::string>(),
                              ej.at("score").get<double>(),
                              ej.at("active").get<bool>()});
      per[id] = {ps::auroc(rl), ps::bedroc(rl), ps::enrichment_factor(rl)};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ps::DataError(path + ": " + e.what());
  }
  ps::MetricsReport report = ps::make_metrics_report(per);
  ps::write_file(cfg.out_dir + "/metrics.csv", ps::metrics_to_csv(report));
  ps::write_file(cfg.out_dir + "/metrics.json",
                 ps::metrics_json(report).dump(1) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-based virtual screening under pocket uncertainty"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false, have_out = false;

  const char* names[] = {"gen-synth",   "detect",        "label",
                         "train-align", "train-adapter", "screen",
                         "pocket-id",   "eval",          "run"};
  const char* descs[] = {
      "generate the synthetic planted-ground-truth dataset",
      "detect cavities on every target",
      "compute reference pockets and cavity labels",
      "phase 1: train encoders with the alignment objective",
      "phase 2: train the aggregation adapter (encoders frozen)",
      "score the held-out libraries under the configured setting",
      "rank cavities against holo ligands and tabulate hit rates",
      "compute metrics from a scores file",
      "full pipeline: generate, train, screen, report"};
  for (int i = 0; i < 9; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--seed", seed_override, "training seed override")
        ->each([&](const std::string&) { have_seed = true; });
    sub->add_option("--out", out_override, "output directory override")
        ->each([&](const std::string&) { have_out = true; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ps::simd::kernels();  // validate POCKETSCREEN_KERNELS before any work
    ps::RunConfig cfg = ps::load_run_config(config_path);
    if (have_seed) cfg.objective.seed = seed_override;
    if (have_out) cfg.out_dir = out_override;

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "gen-synth") ps::gen_synthetic(cfg.synth, cfg.data_dir);
    else if (cmd == "detect") cmd_detect(cfg);
    else if (cmd == "label") cmd_label(cfg);
    else if (cmd == "train-align") cmd_train_align(cfg);
    else if (cmd == "train-adapter") cmd_train_adapter(cfg);
    else if (cmd == "screen") cmd_screen(cfg);
    else if (cmd == "pocket-id") cmd_pocket_id(cfg);
    else if (cmd == "eval") cmd_eval(cfg);
    else if (cmd == "run") ps::run_pipeline(cfg);
  } catch (const ps::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ps::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const ps::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
