#include "octplaque/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "octplaque/render.hpp"

namespace octplaque::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

fs::path fresh_run_dir(const fs::path& out_dir, const std::string& name) {
  const std::string base = timestamp() + "-" + name;
  fs::path dir = out_dir / base;
  for (int i = 1; fs::exists(dir); ++i)
    dir = out_dir / (base + "-" + std::to_string(i));
  fs::create_directories(dir);
  return dir;
}

PhantomParams dataset_params(const RunConfig& cfg) {
  if (!cfg.paper_scale) return cfg.dataset;
  PhantomParams p = PhantomParams::paper_scale();
  p.class_mix = cfg.dataset.class_mix;
  p.artifact_rate = cfg.dataset.artifact_rate;
  p.label_noise_rate = cfg.dataset.label_noise_rate;
  p.seed = cfg.dataset.seed;
  return p;
}

void print_distribution(const DatasetManifest& manifest) {
  const auto counts = manifest.class_counts();
  const double n = static_cast<double>(manifest.frames.size());
  std::printf("frames: %zu  patients: %zu\n", manifest.frames.size(),
              manifest.patient_ids().size());
  for (int c = 0; c < kNumClasses; ++c)
    std::printf("  %-14s %6lld  (%.1f%%)\n",
                to_string(static_cast<Label>(c)).c_str(), counts[c],
                n > 0 ? 100.0 * static_cast<double>(counts[c]) / n : 0.0);
}

struct SplitCaches {
  DatasetManifest train, val, test;
  FrameCache train_cache, val_cache, test_cache;
};

/// Patient-level test split plus a validation carve-out from the remaining
/// training patients.
SplitCaches make_splits(const RunConfig& cfg, const DatasetManifest& manifest,
                        const fs::path& root) {
  RngStream rng(cfg.seed);
  auto [train_all, test] = patient_split(manifest, cfg.test_fraction, rng);

  auto patients = train_all.patient_ids();
  const int n_val =
      std::min<int>(cfg.val_patients, static_cast<int>(patients.size()) - 1);
  if (n_val < 1) throw ConfigError("not enough patients for a validation set");
  std::vector<std::string> val_patients(patients.end() - n_val,
                                        patients.end());
  std::vector<std::string> train_patients(patients.begin(),
                                          patients.end() - n_val);

  SplitCaches out;
  out.train = filter_patients(train_all, train_patients, SplitTag::train);
  out.val = filter_patients(train_all, val_patients, SplitTag::val);
  out.test = std::move(test);
  out.train_cache =
      build_frame_cache(out.train, root, cfg.resize, !cfg.multiclass);
  out.val_cache = build_frame_cache(out.val, root, cfg.resize, !cfg.multiclass);
  out.test_cache =
      build_frame_cache(out.test, root, cfg.resize, !cfg.multiclass);
  return out;
}

Model build_configured_model(const RunConfig& cfg) {
  const BackboneConfig backbone = cfg.backbone();
  if (cfg.representation == InputMode::two_path)
    return build_two_path<float>(backbone, cfg.fusion, cfg.n_classes());
  return build_single_path<float>(backbone, cfg.n_classes());
}

/// Init, optional pretrained load (with a fresh head), freeze regime.
void prepare_model(Model& model, const RunConfig& cfg) {
  RngStream init_rng(RngStream(cfg.seed).split(0x11u).next_u64());
  model.init_params(init_rng);
  if (!cfg.pretrained_store.empty()) {
    const WeightStore store = WeightStore::load(cfg.pretrained_store);
    load_weights(model, store, /*strict=*/false);
    replace_head(model, model.n_classes, init_rng);
  }
  apply_freeze(model, cfg.freeze_spec(), init_rng);
}

json run_report(Model& model, const RunConfig& cfg, const FrameCache& test,
                const std::vector<double>& weights) {
  EvalOutcome out = evaluate_model(model, test, cfg.representation, cfg.crop,
                                   weights);
  json j = out.report.to_json();
  j["loss"] = out.loss;
  return j;
}

}  // namespace

fs::path cmd_generate(const RunConfig& cfg) {
  const PhantomParams params = dataset_params(cfg);
  const fs::path root = cfg.resolved_data_root();
  const DatasetManifest manifest = generate_dataset(params, root);
  print_distribution(manifest);
  return root / "manifest.jsonl";
}

fs::path cmd_train(const RunConfig& cfg) {
  const fs::path root = cfg.resolved_data_root();
  const fs::path manifest_path = root / "manifest.jsonl";
  if (!fs::exists(manifest_path))
    throw std::runtime_error(
        "dataset manifest not found: " + manifest_path.string() +
        " (run the generate command first)");
  const DatasetManifest manifest = load_manifest(manifest_path);

  const fs::path run_dir = fresh_run_dir(cfg.out_dir, cfg.name);
  cfg.save(run_dir / "config.toml");

  SplitCaches splits = make_splits(cfg, manifest, root);
  std::vector<double> weights;
  if (cfg.class_weighting_enabled())
    weights = class_weights(splits.train, !cfg.multiclass);

  TrainConfig tcfg = cfg.train;
  tcfg.class_weights = weights;
  tcfg.seed = cfg.seed;

  const PolicyPair policies = cfg.train_policies();

  json summary;
  Model best_model;
  TrainHistory best_history;
  if (cfg.folds > 0) {
    const auto folds = kfold(splits.train, cfg.folds);
    double f1_sum = 0.0;
    double best_f1 = -1.0;
    for (std::size_t fi = 0; fi < folds.size(); ++fi) {
      const FrameCache ftrain = build_frame_cache(folds[fi].first, root,
                                                  cfg.resize, !cfg.multiclass);
      const FrameCache fval = build_frame_cache(folds[fi].second, root,
                                                cfg.resize, !cfg.multiclass);
      Model model = build_configured_model(cfg);
      prepare_model(model, cfg);
      TrainConfig fold_cfg = tcfg;
      fold_cfg.seed = RngStream(cfg.seed).split(0xF0u + fi).next_u64();
      TrainHistory history =
          train_model(model, ftrain, fval, policies, cfg.representation,
                      fold_cfg);
      history.write_csv(run_dir / ("history_fold" + std::to_string(fi) +
                                   ".csv"));
      f1_sum += history.best_val_f1;
      if (history.best_val_f1 > best_f1) {
        best_f1 = history.best_val_f1;
        best_model = std::move(model);
        best_history = std::move(history);
      }
    }
    summary["fold_mean_val_f1"] = f1_sum / static_cast<double>(folds.size());
    best_history.write_csv(run_dir / "history.csv");
  } else {
    best_model = build_configured_model(cfg);
    prepare_model(best_model, cfg);
    best_history = train_model(best_model, splits.train_cache,
                               splits.val_cache, policies,
                               cfg.representation, tcfg);
    best_history.write_csv(run_dir / "history.csv");
  }

  WeightStore store = WeightStore::from_model(best_model, "checkpoint");
  store.model_meta["representation"] = to_string(cfg.representation);
  store.model_meta["resize"] = cfg.resize;
  store.model_meta["multiclass"] = cfg.multiclass;
  store.save(run_dir / "weights");

  summary["history"] = best_history.summary_json();
  summary["test"] = run_report(best_model, cfg, splits.test_cache, weights);
  std::ofstream sout(run_dir / "summary.json");
  sout << summary.dump(2) << '\n';

  std::ofstream rout(run_dir / "report.json");
  rout << summary["test"].dump(2) << '\n';

  std::printf("run dir: %s\n", run_dir.string().c_str());
  std::printf("best val F1 %.4f (epoch %d)\n", best_history.best_val_f1,
              best_history.best_epoch);
  if (summary["test"].contains("binary")) {
    const auto& b = summary["test"]["binary"];
    auto val = [&](const char* k) {
      return b.at(k).value("defined", false) ? b.at(k).at("value").get<double>()
                                             : -1.0;
    };
    std::printf("test acc %.4f sens %.4f spec %.4f f1 %.4f\n", val("acc"),
                val("sens"), val("spec"), val("f1"));
  }
  return run_dir;
}

void cmd_evaluate(const EvaluateOptions& opts) {
  const WeightStore store = WeightStore::load(opts.weights_dir);
  Model model = model_from_store(store);
  const InputMode mode = input_mode_from_string(
      store.model_meta.value("representation",
                             model.two_path ? "two-path" : "cartesian"));
  const int resize_size =
      store.model_meta.value("resize", model.cfg.input_size + 8);
  const bool multiclass = store.model_meta.value("multiclass", false);

  const DatasetManifest manifest = load_manifest(opts.manifest_path);
  const fs::path root = opts.manifest_path.parent_path();
  const FrameCache cache =
      build_frame_cache(manifest, root, resize_size, !multiclass);
  if (cache.n_classes != model.n_classes)
    throw std::runtime_error("manifest classes do not match the checkpoint");

  EvalOutcome out =
      evaluate_model(model, cache, mode, model.cfg.input_size, {});
  json report = out.report.to_json();
  report["loss"] = out.loss;
  if (opts.out_path.has_parent_path())
    fs::create_directories(opts.out_path.parent_path());
  std::ofstream rout(opts.out_path);
  if (!rout)
    throw std::runtime_error("cannot write report: " + opts.out_path.string());
  rout << report.dump(2) << '\n';

  if (opts.csv_path) {
    std::ofstream csv(*opts.csv_path);
    if (!csv)
      throw std::runtime_error("cannot write csv: " + opts.csv_path->string());
    csv << "patient_id,pullback_id,frame_index,label,prediction\n";
    for (std::size_t i = 0; i < cache.entries.size(); ++i) {
      const auto& e = cache.entries[i];
      csv << e.patient_id << ',' << e.pullback_id << ',' << e.frame_index
          << ',' << e.class_id << ',' << out.preds[i] << '\n';
    }
  }

  if (opts.render_pullback) {
    const std::string& id = *opts.render_pullback;
    std::vector<PullbackStripFrame> frames;
    for (std::size_t i = 0; i < cache.entries.size(); ++i) {
      const auto& e = cache.entries[i];
      const std::string composite = e.patient_id + "/" + e.pullback_id;
      if (e.patient_id != id && composite != id) continue;
      PullbackStripFrame f;
      f.cart = e.cart;
      f.predicted = out.preds[i];
      f.truth = e.class_id;
      f.frame_index = e.frame_index;
      frames.push_back(std::move(f));
    }
    if (frames.empty())
      throw std::runtime_error("unknown pullback id: " + id);
    std::sort(frames.begin(), frames.end(),
              [](const auto& a, const auto& b) {
                return a.frame_index < b.frame_index;
              });
    fs::path fig = opts.out_path;
    fig.replace_extension();
    fig += "_pullback.png";
    render_pullback(frames, fig);
    std::printf("pullback figure: %s\n", fig.string().c_str());
  }
}

namespace {

struct RowResult {
  std::string label;
  double acc = 0, sens = 0, spec = 0, f1 = 0;
  double wa1 = 0, wa2 = 0, wa3 = 0;  // multiclass per-class recall
};

double opt0(const std::optional<double>& v) { return v.value_or(0.0); }

RowResult binary_row(const std::string& label, const EvalOutcome& out) {
  RowResult r;
  r.label = label;
  if (out.report.binary) {
    r.acc = opt0(out.report.binary->acc);
    r.sens = opt0(out.report.binary->sens);
    r.spec = opt0(out.report.binary->spec);
    r.f1 = opt0(out.report.binary->f1);
  }
  return r;
}

RowResult multi_row(const std::string& label, const EvalOutcome& out) {
  RowResult r;
  r.label = label;
  const auto& wa = out.report.per_class_weighted_acc;
  // Published ordering: c1 = calcified, c2 = lipid/fibrous, c3 = no plaque.
  r.wa1 = opt0(wa[2]);
  r.wa2 = opt0(wa[1]);
  r.wa3 = opt0(wa[0]);
  r.f1 = opt0(out.report.multi_f1);
  return r;
}

// Published clinical-study results, kept as non-comparable reference
// columns in the report (different data, different scale).
const std::map<std::string, std::array<double, 4>> kReferenceBinary = {
    {"tableI/aug/Densenet Cart.", {0.892, 0.874, 0.907, 0.885}},
    {"tableI/aug/Densenet Polar.", {0.871, 0.852, 0.883, 0.865}},
    {"tableI/aug/Resnet Cart.", {0.903, 0.861, 0.937, 0.888}},
    {"tableI/aug/Resnet Polar", {0.872, 0.888, 0.859, 0.861}},
    {"tableI/noaug/Densenet Cart.", {0.755, 0.693, 0.807, 0.714}},
    {"tableI/noaug/Densenet Polar.", {0.821, 0.802, 0.831, 0.818}},
    {"tableI/noaug/Resnet Cart.", {0.740, 0.776, 0.719, 0.737}},
    {"tableI/noaug/Resnet Polar", {0.814, 0.810, 0.854, 0.813}},
    {"tableII/Densenet/Full", {0.892, 0.874, 0.907, 0.885}},
    {"tableII/Densenet/From Scratch", {0.737, 0.761, 0.718, 0.721}},
    {"tableII/Densenet/p_r=1", {0.861, 0.842, 0.891, 0.866}},
    {"tableII/Densenet/p_r=2", {0.848, 0.817, 0.892, 0.840}},
    {"tableII/Densenet/From Scratch (Polar)", {0.758, 0.770, 0.743, 0.751}},
    {"tableII/Resnet/Full", {0.903, 0.861, 0.937, 0.888}},
    {"tableII/Resnet/From Scratch", {0.758, 0.733, 0.770, 0.716}},
    {"tableII/Resnet/p_r=1", {0.882, 0.870, 0.893, 0.868}},
    {"tableII/Resnet/p_r=2", {0.851, 0.785, 0.894, 0.823}},
    {"tableII/Resnet/From Scratch (Polar)", {0.774, 0.765, 0.800, 0.757}},
    {"tableIII/Densenet/No Init.", {0.853, 0.836, 0.875, 0.846}},
    {"tableIII/Densenet/c_c=2", {0.871, 0.843, 0.895, 0.864}},
    {"tableIII/Densenet/c_c=3", {0.910, 0.892, 0.919, 0.908}},
    {"tableIII/Densenet/c_c=4", {0.903, 0.881, 0.923, 0.895}},
    {"tableIII/Resnet/No Init.", {0.871, 0.850, 0.883, 0.862}},
    {"tableIII/Resnet/c_c=2", {0.867, 0.871, 0.852, 0.856}},
    {"tableIII/Resnet/c_c=3", {0.917, 0.909, 0.924, 0.913}},
    {"tableIII/Resnet/c_c=4", {0.904, 0.899, 0.906, 0.901}},
};

const std::map<std::string, std::array<double, 4>> kReferenceMulti = {
    {"tableIV/aug/Densenet Cart.", {0.780, 0.848, 0.897, 0.833}},
    {"tableIV/aug/Densenet Polar.", {0.755, 0.803, 0.867, 0.794}},
    {"tableIV/aug/Resnet Cart.", {0.794, 0.822, 0.873, 0.829}},
    {"tableIV/aug/Resnet Polar", {0.762, 0.799, 0.856, 0.805}},
    {"tableIV/noaug/Densenet Cart.", {0.646, 0.702, 0.755, 0.708}},
    {"tableIV/noaug/Densenet Polar.", {0.691, 0.737, 0.801, 0.757}},
    {"tableIV/noaug/Resnet Cart.", {0.630, 0.689, 0.753, 0.694}},
    {"tableIV/noaug/Resnet Polar", {0.687, 0.691, 0.770, 0.733}},
};

}  // namespace

fs::path cmd_reproduce_tables(const RunConfig& cfg, const std::string& subset) {
  if (!subset.empty() && subset != "tableI" && subset != "tableII" &&
      subset != "tableIII" && subset != "tableIV")
    throw ConfigError("unknown table subset: " + subset);
  const auto t_start = std::chrono::steady_clock::now();

  const fs::path root = cfg.resolved_data_root();
  const fs::path run_dir = fresh_run_dir(cfg.out_dir, cfg.name + "-tables");
  cfg.save(run_dir / "config.toml");

  // Reuse an existing dataset; otherwise generate the tables-sized one.
  DatasetManifest manifest;
  if (fs::exists(root / "manifest.jsonl")) {
    manifest = load_manifest(root / "manifest.jsonl");
    std::printf("reusing dataset at %s (%zu frames)\n", root.string().c_str(),
                manifest.frames.size());
  } else {
    PhantomParams params = cfg.dataset;
    params.n_patients = cfg.tables_patients;
    params.frames_per_pullback = cfg.tables_frames;
    manifest = generate_dataset(params, root);
    print_distribution(manifest);
  }

  // Shared splits and caches (binary and multiclass views).
  RunConfig base = cfg;
  base.train.epochs = cfg.tables_epochs;
  RngStream rng(cfg.seed);
  auto [train_all, test] = patient_split(manifest, cfg.test_fraction, rng);
  auto patients = train_all.patient_ids();
  const int n_val =
      std::min<int>(cfg.val_patients, static_cast<int>(patients.size()) - 1);
  std::vector<std::string> val_p(patients.end() - n_val, patients.end());
  std::vector<std::string> train_p(patients.begin(), patients.end() - n_val);
  const DatasetManifest train_m =
      filter_patients(train_all, train_p, SplitTag::train);
  const DatasetManifest val_m = filter_patients(train_all, val_p, SplitTag::val);

  struct View {
    FrameCache train, val, test;
  };
  auto make_view = [&](bool binary) {
    View v;
    v.train = build_frame_cache(train_m, root, cfg.resize, binary);
    v.val = build_frame_cache(val_m, root, cfg.resize, binary);
    v.test = build_frame_cache(test, root, cfg.resize, binary);
    return v;
  };
  const View bin_view = make_view(true);
  const View multi_view = make_view(false);

  // One proxy store per family; every pretrained run draws from these.
  PhantomParams proxy_params = cfg.dataset;
  proxy_params.artifact_rate = 0.5;
  const auto proxy_frames = generate_proxy_frames(
      proxy_params, cfg.tables_proxy_frames,
      RngStream(cfg.dataset.seed).split(0xBEEFu));
  std::map<Family, WeightStore> proxy_stores;
  for (Family fam : {Family::residual, Family::dense}) {
    RunConfig pc = base;
    pc.family = fam;
    const BackboneConfig bc = pc.backbone();
    TrainConfig ptc = base.train;
    ptc.epochs = cfg.tables_proxy_epochs;
    ptc.seed = RngStream(cfg.seed).split(0x99u + static_cast<int>(fam)).next_u64();
    proxy_stores.emplace(
        fam, proxy_pretrain(bc, proxy_frames, Representation::cartesian, ptc,
                            cfg.resize));
    std::printf("proxy pretraining done (%s)\n", to_string(fam).c_str());
  }

  int run_counter = 0;
  auto run_one = [&](Family fam, InputMode mode, bool augment,
                     const std::string& freeze, bool multiclass,
                     bool pretrained, FusionConfig fusion) {
    RunConfig rc = base;
    rc.family = fam;
    rc.representation = mode;
    rc.augment_enabled = augment;
    rc.freeze = freeze;
    rc.multiclass = multiclass;
    rc.fusion = fusion;
    rc.seed = RngStream(cfg.seed).split(0x7AB1Eu + run_counter++).next_u64();
    const View& view = multiclass ? multi_view : bin_view;

    Model model = build_configured_model(rc);
    RngStream init_rng(RngStream(rc.seed).split(0x11u).next_u64());
    model.init_params(init_rng);
    if (pretrained) {
      load_weights(model, proxy_stores.at(fam), /*strict=*/false);
      replace_head(model, model.n_classes, init_rng);
    }
    apply_freeze(model, rc.freeze_spec(), init_rng);

    TrainConfig tc = base.train;
    tc.seed = rc.seed;
    if (multiclass) tc.class_weights = class_weights(train_m, false);
    const PolicyPair policies = rc.train_policies();
    train_model(model, view.train, view.val, policies, mode, tc);
    return evaluate_model(model, view.test, mode, rc.crop, tc.class_weights);
  };

  std::ostringstream md;
  md << "# Desk-scale experiment grid\n\n";
  md << "Synthetic phantom results next to the published clinical-study\n";
  md << "values. The reference columns come from a different (private)\n";
  md << "dataset at a different scale and are **not comparable**; they are\n";
  md << "shown for row-by-row orientation only.\n\n";

  const char* fam_name[2] = {"Resnet", "Densenet"};
  auto fam_of = [&](int i) { return i == 0 ? Family::residual : Family::dense; };

  auto binary_table = [&](std::ostringstream& out, const std::string& title,
                          const std::vector<RowResult>& rows,
                          const std::vector<std::string>& ref_keys) {
    out << "## " << title << "\n\n";
    out << "| Model | Acc. | Sens. | Spec. | F1 | Ref. Acc. | Ref. F1 |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const auto& ref = kReferenceBinary.at(ref_keys[i]);
      char line[256];
      std::snprintf(line, sizeof(line),
                    "| %s | %.3f | %.3f | %.3f | %.3f | %.3f | %.3f |\n",
                    r.label.c_str(), r.acc, r.sens, r.spec, r.f1, ref[0],
                    ref[3]);
      out << line;
    }
    out << "\n";
  };

  if (subset.empty() || subset == "tableI") {
    std::vector<RowResult> rows;
    std::vector<std::string> refs;
    for (bool aug : {true, false}) {
      for (int fi : {1, 0}) {  // published order: Densenet first
        for (InputMode mode : {InputMode::cartesian, InputMode::polar}) {
          const std::string rep =
              mode == InputMode::cartesian
                  ? std::string(" Cart.")
                  : (fi == 1 ? std::string(" Polar.") : std::string(" Polar"));
          const std::string label =
              std::string(aug ? "" : "(no aug) ") + fam_name[fi] + rep;
          rows.push_back(binary_row(
              label, run_one(fam_of(fi), mode, aug, "full", false, true,
                             cfg.fusion)));
          refs.push_back(std::string("tableI/") + (aug ? "aug" : "noaug") +
                         "/" + fam_name[fi] + rep);
          std::printf("[tableI] %s done\n", label.c_str());
        }
      }
    }
    binary_table(md, "Table I analogue: binary classification", rows, refs);
  }

  if (subset.empty() || subset == "tableII") {
    std::vector<RowResult> rows;
    std::vector<std::string> refs;
    for (int fi : {1, 0}) {
      const struct {
        const char* label;
        InputMode mode;
        const char* freeze;
        bool pretrained;
      } variants[] = {
          {"Full", InputMode::cartesian, "full", true},
          {"From Scratch", InputMode::cartesian, "from_scratch", false},
          {"p_r=1", InputMode::cartesian, "p1", true},
          {"p_r=2", InputMode::cartesian, "p2", true},
          {"From Scratch (Polar)", InputMode::polar, "from_scratch", false},
      };
      for (const auto& v : variants) {
        const std::string label = std::string(fam_name[fi]) + " " + v.label;
        rows.push_back(binary_row(
            label, run_one(fam_of(fi), v.mode, true, v.freeze, false,
                           v.pretrained, cfg.fusion)));
        refs.push_back(std::string("tableII/") + fam_name[fi] + "/" + v.label);
        std::printf("[tableII] %s done\n", label.c_str());
      }
    }
    binary_table(md, "Table II analogue: transfer learning", rows, refs);
  }

  if (subset.empty() || subset == "tableIII") {
    std::vector<RowResult> rows;
    std::vector<std::string> refs;
    for (int fi : {1, 0}) {
      const struct {
        const char* label;
        int concat;
        bool sliced;
      } variants[] = {
          {"No Init.", 3, false},
          {"c_c=2", 2, true},
          {"c_c=3", 3, true},
          {"c_c=4", 4, true},
      };
      for (const auto& v : variants) {
        FusionConfig fusion;
        fusion.concat_point = v.concat;
        fusion.sliced_init = v.sliced;
        const std::string label = std::string(fam_name[fi]) + " " + v.label;
        rows.push_back(binary_row(
            label, run_one(fam_of(fi), InputMode::two_path, true, "full",
                           false, true, fusion)));
        refs.push_back(std::string("tableIII/") + fam_name[fi] + "/" + v.label);
        std::printf("[tableIII] %s done\n", label.c_str());
      }
    }
    binary_table(md, "Table III analogue: two-path fusion", rows, refs);
  }

  if (subset.empty() || subset == "tableIV") {
    md << "## Table IV analogue: multi-class classification\n\n";
    md << "| Model | W.A. c1 | W.A. c2 | W.A. c3 | F1 | Ref. c1 | Ref. F1 "
          "|\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (bool aug : {true, false}) {
      for (int fi : {1, 0}) {
        for (InputMode mode : {InputMode::cartesian, InputMode::polar}) {
          const std::string rep =
              mode == InputMode::cartesian
                  ? std::string(" Cart.")
                  : (fi == 1 ? std::string(" Polar.") : std::string(" Polar"));
          const std::string label =
              std::string(aug ? "" : "(no aug) ") + fam_name[fi] + rep;
          const RowResult r = multi_row(
              label,
              run_one(fam_of(fi), mode, aug, "full", true, true, cfg.fusion));
          const auto& ref = kReferenceMulti.at(
              std::string("tableIV/") + (aug ? "aug" : "noaug") + "/" +
              fam_name[fi] + rep);
          char line[256];
          std::snprintf(line, sizeof(line),
                        "| %s | %.3f | %.3f | %.3f | %.3f | %.3f | %.3f |\n",
                        r.label.c_str(), r.wa1, r.wa2, r.wa3, r.f1, ref[0],
                        ref[3]);
          md << line;
          std::printf("[tableIV] %s done\n", label.c_str());
        }
      }
    }
    md << "\n";
  }

  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count() /
      60.0;
  char foot[128];
  std::snprintf(foot, sizeof(foot), "Total runtime: %.1f minutes.\n", minutes);
  md << foot;

  const fs::path report = run_dir / "tables.md";
  std::ofstream out(report);
  out << md.str();
  std::printf("tables report: %s (%.1f min)\n", report.string().c_str(),
              minutes);
  return report;
}

}  // namespace octplaque::cli
