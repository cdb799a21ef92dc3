// SPDX-License-Identifier: Apache-2.0

#include "pocketscreen/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include "pocketscreen/errors.hpp"
#include "pocketscreen/jsonio.hpp"

namespace pocketscreen {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& val) {
  int out = 0;
  auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), out);
  if (ec != std::errc{} || p != val.data() + val.size())
    throw ConfigError("bad integer for " + key + ": '" + val + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& val) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), out);
  if (ec != std::errc{} || p != val.data() + val.size())
    throw ConfigError("bad seed for " + key + ": '" + val + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& val) {
  char* end = nullptr;
  double out = std::strtod(val.c_str(), &end);
  if (end != val.c_str() + val.size() || val.empty())
    throw ConfigError("bad number for " + key + ": '" + val + "'");
  return out;
}

void apply_key(RunConfig& c, const std::string& key, const std::string& val) {
  if (key == "grid_spacing") c.detector.grid_spacing = parse_double(key, val);
  else if (key == "psp_min_events") c.detector.psp_min_events = parse_int(key, val);
  else if (key == "min_cluster_points") c.detector.min_cluster_points = parse_int(key, val);
  else if (key == "max_cavities") c.detector.max_cavities = parse_int(key, val);
  else if (key == "probe_margin") c.detector.probe_margin = parse_double(key, val);
  else if (key == "holo_radius_d") c.pocket.holo_radius_d = parse_double(key, val);
  else if (key == "enlarged_radius") c.pocket.enlarged_radius = parse_double(key, val);
  else if (key == "cavity_residue_radius") c.pocket.cavity_residue_radius = parse_double(key, val);
  else if (key == "max_pocket_atoms") c.pocket.max_pocket_atoms = parse_int(key, val);
  else if (key == "downsample_seed") c.pocket.downsample_seed = parse_u64(key, val);
  else if (key == "tau_pos") c.label.tau_pos = parse_double(key, val);
  else if (key == "tau_neg") c.label.tau_neg = parse_double(key, val);
  else if (key == "negative_ratio") c.label.negative_ratio = parse_double(key, val);
  else if (key == "rng_seed") c.label.rng_seed = parse_u64(key, val);
  else if (key == "lambda") c.objective.lambda = parse_double(key, val);
  else if (key == "batch_size") c.objective.batch_size = parse_int(key, val);
  else if (key == "complex_mix_ratio") c.objective.complex_mix_ratio = parse_double(key, val);
  else if (key == "max_epochs") c.objective.max_epochs = parse_int(key, val);
  else if (key == "patience") c.objective.patience = parse_int(key, val);
  else if (key == "seed") c.objective.seed = parse_u64(key, val);
  else if (key == "lr") c.objective.lr = parse_double(key, val);
  else if (key == "d_e") c.enc.d_e = parse_int(key, val);
  else if (key == "rbf_k") c.enc.K = parse_int(key, val);
  else if (key == "r_max") c.enc.r_max = parse_double(key, val);
  else if (key == "rbf_width") c.enc.rbf_width = parse_double(key, val);
  else if (key == "hidden") c.enc.h = parse_int(key, val);
  else if (key == "embed_dim") c.enc.D = parse_int(key, val);
  else if (key == "n_targets") c.synth.n_targets = parse_int(key, val);
  else if (key == "actives_per_target") c.synth.actives_per_target = parse_int(key, val);
  else if (key == "decoys_per_target") c.synth.decoys_per_target = parse_int(key, val);
  else if (key == "cavities_min") c.synth.cavities_min = parse_int(key, val);
  else if (key == "cavities_max") c.synth.cavities_max = parse_int(key, val);
  else if (key == "noise_scale") c.synth.noise_scale = parse_double(key, val);
  else if (key == "synth_seed") c.synth.seed = parse_u64(key, val);
  else if (key == "data_dir") c.data_dir = val;
  else if (key == "out_dir") c.out_dir = val;
  else if (key == "setting") {
    if (val != "oracle" && val != "annotated" && val != "blind")
      throw ConfigError("setting must be oracle, annotated, or blind");
    c.setting = val;
  } else if (key == "mode") {
    if (val != "max_pool" && val != "adapter")
      throw ConfigError("mode must be max_pool or adapter");
    c.mode = val;
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

EncItem crop_item(const ProteinStructure& s, const Vec3& center,
                  const PocketConfig& pcfg) {
  Pocket crop = crop_enlarged(s, center, pcfg);
  EncItem item;
  item.atoms.reserve(crop.atom_indices.size());
  for (int i : crop.atom_indices)
    item.atoms.push_back(s.atoms[static_cast<std::size_t>(i)]);
  item.center = crop.center;
  return item;
}

// Annotated setting: the detected cavity most overlapping the reference
// pocket, ties by larger cavity then earlier detector rank.
std::size_t best_iou_index(const std::vector<LabeledCavity>& labeled) {
  if (labeled.empty()) throw DataError("annotated setting: no detected cavities");
  std::size_t best = 0;
  for (std::size_t i = 1; i < labeled.size(); ++i) {
    if (labeled[i].iou > labeled[best].iou ||
        (labeled[i].iou == labeled[best].iou &&
         labeled[i].cavity.size_score > labeled[best].cavity.size_score))
      best = i;
  }
  return best;
}

EncItem ligand_item(const LigandConformer& lig) {
  EncItem item;
  item.atoms = lig.atoms;
  item.center = centroid(lig.atoms);
  return item;
}

nlohmann::json vec_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}

const char* label_name(CavityLabel l) {
  switch (l) {
    case CavityLabel::positive: return "positive";
    case CavityLabel::negative: return "negative";
    default: return "ignore";
  }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::size_t pos = 0, lineno = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value");
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return parse_config_text(read_file(path));
}

nlohmann::json config_echo(const RunConfig& c) {
  return nlohmann::json{
      {"grid_spacing", c.detector.grid_spacing},
      {"psp_min_events", c.detector.psp_min_events},
      {"min_cluster_points", c.detector.min_cluster_points},
      {"max_cavities", c.detector.max_cavities},
      {"probe_margin", c.detector.probe_margin},
      {"holo_radius_d", c.pocket.holo_radius_d},
      {"enlarged_radius", c.pocket.enlarged_radius},
      {"cavity_residue_radius", c.pocket.cavity_residue_radius},
      {"max_pocket_atoms", c.pocket.max_pocket_atoms},
      {"downsample_seed", c.pocket.downsample_seed},
      {"tau_pos", c.label.tau_pos},
      {"tau_neg", c.label.tau_neg},
      {"negative_ratio", c.label.negative_ratio},
      {"rng_seed", c.label.rng_seed},
      {"lambda", c.objective.lambda},
      {"batch_size", c.objective.batch_size},
      {"complex_mix_ratio", c.objective.complex_mix_ratio},
      {"max_epochs", c.objective.max_epochs},
      {"patience", c.objective.patience},
      {"seed", c.objective.seed},
      {"lr", c.objective.lr},
      {"d_e", c.enc.d_e},
      {"rbf_k", c.enc.K},
      {"r_max", c.enc.r_max},
      {"rbf_width", c.enc.rbf_width},
      {"hidden", c.enc.h},
      {"embed_dim", c.enc.D},
      {"n_targets", c.synth.n_targets},
      {"actives_per_target", c.synth.actives_per_target},
      {"decoys_per_target", c.synth.decoys_per_target},
      {"cavities_min", c.synth.cavities_min},
      {"cavities_max", c.synth.cavities_max},
      {"noise_scale", c.synth.noise_scale},
      {"synth_seed", c.synth.seed},
      {"data_dir", c.data_dir},
      {"out_dir", c.out_dir},
      {"setting", c.setting},
      {"mode", c.mode},
  };
}

PreparedTarget prepare_target(const ScreeningTarget& target, const RunConfig& cfg) {
  if (!target.holo_ligand)
    throw DataError(target.target_id + ": no holo ligand on record");
  PreparedTarget p;
  p.cavities = detect_cavities(target.structure, cfg.detector);
  p.holo = holo_pocket(target.structure, *target.holo_ligand, cfg.pocket);

  std::vector<LabeledCavity> pre;
  pre.reserve(p.cavities.size());
  for (const Cavity& c : p.cavities) {
    LabeledCavity lc;
    lc.cavity = c;
    lc.pocket = cavity_residue_pocket(target.structure, c, cfg.pocket);
    pre.push_back(std::move(lc));
  }
  p.labeled = label_cavities(p.holo, std::move(pre), cfg.label);

  p.bundle.target_id = target.target_id;
  p.bundle.holo_crop = crop_item(target.structure, p.holo.center, cfg.pocket);
  for (std::size_t i = 0; i < p.labeled.size(); ++i) {
    CavityEntry e;
    e.label = p.labeled[i].label;
    e.iou = p.labeled[i].iou;
    e.size_score = p.cavities[i].size_score;
    e.rank = static_cast<int>(i);
    e.usable = p.labeled[i].pocket.valid();
    e.crop = crop_item(target.structure, p.cavities[i].center, cfg.pocket);
    e.center = p.cavities[i].center;
    p.bundle.cavities.push_back(std::move(e));
  }
  return p;
}

PreparedWorld prepare_world(const RunConfig& cfg) {
  PreparedWorld pw;
  pw.world = load_world(cfg.data_dir);
  for (std::size_t i = 0; i < pw.world.targets.size(); ++i) {
    pw.prepared.push_back(prepare_target(pw.world.targets[i], cfg));
    const std::string& split = pw.world.info[i].split;
    if (split == "train") pw.train_idx.push_back(static_cast<int>(i));
    else if (split == "val") pw.val_idx.push_back(static_cast<int>(i));
    else if (split == "test") pw.test_idx.push_back(static_cast<int>(i));
    else throw DataError(pw.world.info[i].target_id + ": unknown split " + split);
  }
  return pw;
}

static void add_split_complexes(const PreparedWorld& pw, const std::vector<int>& idx,
                                std::vector<ComplexExample>* out) {
  for (int i : idx) {
    const ScreeningTarget& t = pw.world.targets[static_cast<std::size_t>(i)];
    out->push_back({i, ligand_item(*t.holo_ligand)});
    for (const LigandConformer& lig : t.library)
      if (lig.activity_label == ActivityLabel::active)
        out->push_back({i, ligand_item(lig)});
  }
}

AlignDataset build_align_dataset(const PreparedWorld& pw) {
  AlignDataset ds;
  ds.bundles.reserve(pw.prepared.size());
  for (const PreparedTarget& p : pw.prepared) ds.bundles.push_back(p.bundle);
  add_split_complexes(pw, pw.train_idx, &ds.train);
  add_split_complexes(pw, pw.val_idx, &ds.val);
  return ds;
}

AdapterDataset build_adapter_dataset(const PreparedWorld& pw,
                                     const ModelParams& params) {
  AdapterDataset ds;
  ds.bundle_cavities.resize(pw.prepared.size());
  for (std::size_t i = 0; i < pw.prepared.size(); ++i)
    for (const CavityEntry& e : pw.prepared[i].bundle.cavities)
      ds.bundle_cavities[i].push_back(
          encode(params.cavity_encoder(), e.crop.atoms, e.crop.center));

  auto add = [&](const std::vector<int>& idx, std::vector<AdapterExample>* out) {
    for (int i : idx) {
      std::size_t ui = static_cast<std::size_t>(i);
      const TargetBundle& b = pw.prepared[ui].bundle;
      std::size_t S = b.cavities.size();
      if (S == 0) continue;  // nothing to attend over

      std::size_t best = 0;
      for (std::size_t s = 1; s < S; ++s) {
        const CavityEntry &cand = b.cavities[s], &cur = b.cavities[best];
        if (cand.iou > cur.iou ||
            (cand.iou == cur.iou && cand.size_score > cur.size_score))
          best = s;
      }
      SupervisionTarget one_hot;
      one_hot.kind = SupervisionKind::one_hot;
      one_hot.s.assign(S, 0.0);
      one_hot.s[best] = 1.0;

      const ScreeningTarget& t = pw.world.targets[ui];
      auto push = [&](const LigandConformer& lig) {
        AdapterExample ex;
        ex.ligand = encode(params.ligand_encoder, lig.atoms, centroid(lig.atoms));
        ex.bundle = i;
        ex.one_hot = one_hot;
        ex.soft = soft_labels_from_frozen_model(ex.ligand, ds.bundle_cavities[ui],
                                                params.loss);
        out->push_back(std::move(ex));
      };
      push(*t.holo_ligand);
      for (const LigandConformer& lig : t.library)
        if (lig.activity_label == ActivityLabel::active) push(lig);
    }
  };
  add(pw.train_idx, &ds.train);
  add(pw.val_idx, &ds.val);
  return ds;
}

MetricsReport evaluate_setting(const PreparedWorld& pw, const ModelParams& params,
                               const RunConfig& cfg, const std::string& setting,
                               const std::string& mode,
                               nlohmann::json* scores_out) {
  if (pw.test_idx.empty()) throw DataError("no test-split targets to evaluate");
  std::map<std::string, TargetMetrics> per;
  nlohmann::json targets = nlohmann::json::object();

  for (int i : pw.test_idx) {
    std::size_t ui = static_cast<std::size_t>(i);
    const ScreeningTarget& t = pw.world.targets[ui];
    const PreparedTarget& prep = pw.prepared[ui];

    RankedLibrary rl;
    if (setting == "oracle") {
      rl = screen_annotated(t, prep.holo, params, cfg.pocket);
    } else if (setting == "annotated") {
      rl = screen_annotated(t, prep.labeled[best_iou_index(prep.labeled)].pocket,
                            params, cfg.pocket);
    } else if (setting == "blind") {
      rl = screen_blind(t, prep.cavities, params, cfg.pocket,
                        mode == "adapter" ? ScreenMode::adapter
                                          : ScreenMode::max_pool);
    } else {
      throw ConfigError("unknown setting: " + setting);
    }

    per[t.target_id] = {auroc(rl), bedroc(rl), enrichment_factor(rl)};
    if (scores_out) {
      nlohmann::json entries = nlohmann::json::array();
      for (const RankedEntry& e : rl.entries)
        entries.push_back({{"id", e.ligand_id},
                           {"score", e.score},
                           {"active", e.is_active}});
      targets[t.target_id] = std::move(entries);
    }
  }
  if (scores_out)
    *scores_out = {{"setting", setting},
                   {"mode", setting == "blind" ? mode : "none"},
                   {"tie_policy", "stable input order"},
                   {"targets", std::move(targets)}};
  return make_metrics_report(per);
}

PocketIdCounts pocket_id_stage(const PreparedWorld& pw, const ModelParams& params,
                               const RunConfig& cfg) {
  PocketIdCounts acc;
  for (int i : pw.test_idx) {
    std::size_t ui = static_cast<std::size_t>(i);
    const ScreeningTarget& t = pw.world.targets[ui];
    pocket_id_accumulate(t.structure, pw.prepared[ui].cavities, {*t.holo_ligand},
                         params, cfg.pocket, acc);
  }
  return acc;
}

double adapter_binding_rate(const PreparedWorld& pw, const ModelParams& params,
                            double tol_A) {
  long cases = 0, hits = 0;
  for (int i : pw.test_idx) {
    std::size_t ui = static_cast<std::size_t>(i);
    const TargetBundle& b = pw.prepared[ui].bundle;
    const ScreeningTarget& t = pw.world.targets[ui];
    const Vec3& binding = pw.world.info[ui].binding_center;

    std::vector<Embedding> cav;
    for (const CavityEntry& e : b.cavities)
      cav.push_back(encode(params.cavity_encoder(), e.crop.atoms, e.crop.center));

    auto check = [&](const LigandConformer& lig) {
      ++cases;
      if (cav.empty()) return;
      Embedding el = encode(params.ligand_encoder, lig.atoms, centroid(lig.atoms));
      std::vector<double> q = project_ligand(el, params.adapter);
      Attention att = attention(q, cav, params.adapter);
      std::size_t arg = 0;
      for (std::size_t s = 1; s < att.weights.size(); ++s)
        if (att.weights[s] > att.weights[arg]) arg = s;
      if (dist(b.cavities[arg].center, binding) <= tol_A) ++hits;
    };
    check(*t.holo_ligand);
    for (const LigandConformer& lig : t.library)
      if (lig.activity_label == ActivityLabel::active) check(lig);
  }
  if (cases == 0) throw DataError("adapter_binding_rate: no held-out complexes");
  return static_cast<double>(hits) / static_cast<double>(cases);
}

nlohmann::json pocket_id_json(const PocketIdCounts& acc) {
  auto rates = [&](const std::array<long, 4>& hits) {
    nlohmann::json a = nlohmann::json::array();
    for (std::size_t i = 0; i < hits.size(); ++i) a.push_back(acc.rate(hits, i));
    return a;
  };
  return {{"cases", acc.cases},
          {"thresholds", kPocketIdThresholds},
          {"model", {{"top1", rates(acc.top1_model)}, {"topn", rates(acc.topn_model)}}},
          {"ideal", {{"top1", rates(acc.top1_ideal)}, {"topn", rates(acc.topn_ideal)}}}};
}

std::string pocket_id_csv(const PocketIdCounts& acc) {
  std::string out = "threshold_A,top1_model,topn_model,top1_ideal,topn_ideal\n";
  char buf[200];
  for (std::size_t i = 0; i < kPocketIdThresholds.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%g,%.10g,%.10g,%.10g,%.10g\n",
                  kPocketIdThresholds[i], acc.rate(acc.top1_model, i),
                  acc.rate(acc.topn_model, i), acc.rate(acc.top1_ideal, i),
                  acc.rate(acc.topn_ideal, i));
    out += buf;
  }
  return out;
}

nlohmann::json metrics_json(const MetricsReport& report) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [id, m] : report.per_target)
    per[id] = {{"auroc", m.auroc}, {"bedroc", m.bedroc}, {"ef1", m.ef1}};
  return {{"per_target", std::move(per)},
          {"averages",
           {{"auroc", report.averages.auroc},
            {"bedroc", report.averages.bedroc},
            {"ef1", report.averages.ef1}}}};
}

nlohmann::json cavities_json(const PreparedWorld& pw) {
  nlohmann::json targets = nlohmann::json::object();
  for (std::size_t i = 0; i < pw.prepared.size(); ++i) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Cavity& c : pw.prepared[i].cavities)
      arr.push_back({{"center", vec_json(c.center)}, {"size_score", c.size_score}});
    targets[pw.world.info[i].target_id] = std::move(arr);
  }
  return {{"targets", std::move(targets)}};
}

nlohmann::json labels_json(const PreparedWorld& pw) {
  nlohmann::json targets = nlohmann::json::object();
  for (std::size_t i = 0; i < pw.prepared.size(); ++i) {
    const PreparedTarget& p = pw.prepared[i];
    nlohmann::json cavs = nlohmann::json::array();
    for (const LabeledCavity& lc : p.labeled)
      cavs.push_back({{"iou", lc.iou},
                      {"coverage", lc.coverage},
                      {"label", label_name(lc.label)},
                      {"usable", lc.pocket.valid()}});
    targets[pw.world.info[i].target_id] = {
        {"holo",
         {{"center", vec_json(p.holo.center)},
          {"n_atoms", p.holo.atom_indices.size()},
          {"n_residues", p.holo.residue_keys.size()}}},
        {"cavities", std::move(cavs)}};
  }
  return {{"targets", std::move(targets)}};
}

nlohmann::json trace_json(const TrainTrace& trace) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const EpochStats& e : trace.epochs)
    epochs.push_back({{"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  return {{"epochs", std::move(epochs)},
          {"best_epoch", trace.best_epoch},
          {"best_loss", trace.best_loss}};
}

void run_pipeline(const RunConfig& cfg) {
  gen_synthetic(cfg.synth, cfg.data_dir);
  PreparedWorld pw = prepare_world(cfg);

  auto dump = [&](const std::string& name, const nlohmann::json& j) {
    write_file(cfg.out_dir + "/" + name, j.dump(1) + "\n");
  };
  dump("cavities.json", cavities_json(pw));
  dump("labels.json", labels_json(pw));

  AlignDataset align = build_align_dataset(pw);
  ModelParams params = init_model(cfg.enc, mix_seed(cfg.objective.seed, 1));
  TrainTrace t1 = train_align(align, params, cfg.objective, cfg.label);
  write_file(cfg.out_dir + "/checkpoint.json", checkpoint_to_json(params));
  dump("align_trace.json", trace_json(t1));
  std::string hash_phase1 = checkpoint_hash(params);
  std::string enc_hash_phase1 = encoder_loss_hash(params);

  AdapterDataset adapter = build_adapter_dataset(pw, params);
  TrainTrace t2 = train_adapter(adapter, params, cfg.objective);
  write_file(cfg.out_dir + "/adapter_checkpoint.json", checkpoint_to_json(params));
  dump("adapter_trace.json", trace_json(t2));

  const char* kSettings[4][2] = {{"oracle", "none"},
                                 {"annotated", "none"},
                                 {"blind", "max_pool"},
                                 {"blind", "adapter"}};
  nlohmann::json all_metrics = nlohmann::json::object();
  MetricsReport configured;
  for (const auto& sm : kSettings) {
    std::string setting = sm[0], mode = sm[1];
    nlohmann::json scores;
    MetricsReport rep = evaluate_setting(pw, params, cfg, setting, mode, &scores);
    std::string tag = setting == "blind" ? "blind_" + mode : setting;
    dump("scores_" + tag + ".json", scores);
    all_metrics[tag] = metrics_json(rep);
    if (setting == cfg.setting &&
        (setting != "blind" || mode == cfg.mode))
      configured = rep;
  }
  write_file(cfg.out_dir + "/metrics.csv", metrics_to_csv(configured));

  PocketIdCounts pid = pocket_id_stage(pw, params, cfg);
  write_file(cfg.out_dir + "/pocket_id.csv", pocket_id_csv(pid));

  nlohmann::json splits = {{"train", nlohmann::json::array()},
                           {"val", nlohmann::json::array()},
                           {"test", nlohmann::json::array()}};
  for (int i : pw.train_idx)
    splits["train"].push_back(pw.world.info[static_cast<std::size_t>(i)].target_id);
  for (int i : pw.val_idx)
    splits["val"].push_back(pw.world.info[static_cast<std::size_t>(i)].target_id);
  for (int i : pw.test_idx)
    splits["test"].push_back(pw.world.info[static_cast<std::size_t>(i)].target_id);

  nlohmann::json report = {
      {"config", config_echo(cfg)},
      {"dataset",
       {{"manifest_hash", content_hash(read_file(cfg.data_dir + "/manifest.json"))},
        {"n_targets", pw.world.targets.size()},
        {"splits", std::move(splits)}}},
      {"checkpoints",
       {{"align", hash_phase1},
        {"adapter", checkpoint_hash(params)},
        {"encoder_loss_phase1", enc_hash_phase1},
        {"encoder_loss_phase2", encoder_loss_hash(params)}}},
      {"tie_policy", "stable input order"},
      {"training",
       {{"align",
         {{"epochs", t1.epochs.size()},
          {"best_epoch", t1.best_epoch},
          {"best_loss", t1.best_loss}}},
        {"adapter",
         {{"epochs", t2.epochs.size()},
          {"best_epoch", t2.best_epoch},
          {"best_loss", t2.best_loss}}}}},
      {"metrics", std::move(all_metrics)},
      {"pocket_id", pocket_id_json(pid)},
      {"diagnostics",
       {{"binding_argmax_rate", adapter_binding_rate(pw, params)}}},
  };
  dump("report.json", report);
}

}  // namespace pocketscreen
