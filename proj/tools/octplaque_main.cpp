#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "octplaque/cli.hpp"

namespace {

using octplaque::RunConfig;

/// Shared `--config` + override flags; overrides win over file values.
struct CommonArgs {
  std::string config_path;
  std::optional<std::string> representation, family, mode, name, out_dir,
      data_root, freeze, pretrained;
  std::optional<long long> seed, epochs, batch_size, resize, crop, folds,
      concat_point;
  std::optional<bool> augment, deterministic, paper_scale, sliced_init;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "TOML run configuration file");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--name", name, "run name");
    app->add_option("--out", out_dir, "output directory");
    app->add_option("--data-root", data_root, "dataset root directory");
    app->add_option("--representation", representation,
                    "polar | cartesian | two-path");
    app->add_option("--family", family, "residual | dense");
    app->add_option("--mode", mode, "binary | multiclass");
    app->add_option("--freeze", freeze, "full | from_scratch | p1 | p2");
    app->add_option("--pretrained", pretrained, "weight store directory");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--batch-size", batch_size, "mini-batch size");
    app->add_option("--resize", resize, "resample size before cropping");
    app->add_option("--crop", crop, "network input crop size");
    app->add_option("--folds", folds, "patient-level cross-validation folds");
    app->add_option("--concat-point", concat_point, "fusion point (2|3|4)");
    app->add_flag("--augment,!--no-augment", augment,
                  "toggle training-time augmentation");
    app->add_flag("--deterministic,!--no-deterministic", deterministic,
                  "bit-reproducible mode");
    app->add_flag("--paper-scale", paper_scale,
                  "full-scale dataset (49 patients, 496x960 frames)");
    app->add_flag("--sliced-init,!--no-sliced-init", sliced_init,
                  "fusion-point weight initialization");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{}
                                        : RunConfig::from_file(config_path);
    if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
    if (name) cfg.name = *name;
    if (out_dir) cfg.out_dir = *out_dir;
    if (data_root) cfg.data_root = *data_root;
    if (representation)
      cfg.representation = octplaque::input_mode_from_string(*representation);
    if (family) cfg.family = octplaque::family_from_string(*family);
    if (mode) {
      if (*mode == "binary") cfg.multiclass = false;
      else if (*mode == "multiclass") cfg.multiclass = true;
      else throw octplaque::ConfigError("mode must be binary or multiclass");
    }
    if (freeze) cfg.freeze = *freeze;
    if (pretrained) cfg.pretrained_store = *pretrained;
    if (epochs) cfg.train.epochs = static_cast<int>(*epochs);
    if (batch_size) cfg.train.batch_size = static_cast<int>(*batch_size);
    if (resize) cfg.resize = static_cast<int>(*resize);
    if (crop) cfg.crop = static_cast<int>(*crop);
    if (folds) cfg.folds = static_cast<int>(*folds);
    if (concat_point) cfg.fusion.concat_point = static_cast<int>(*concat_point);
    if (augment) cfg.augment_enabled = *augment;
    if (deterministic) cfg.deterministic = *deterministic;
    if (paper_scale) cfg.paper_scale = *paper_scale;
    if (sliced_init) cfg.fusion.sliced_init = *sliced_init;
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic IVOCT plaque-classification workbench"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, tables_args;
  auto* gen = app.add_subcommand("generate", "write the phantom dataset");
  gen_args.attach(gen);
  auto* train = app.add_subcommand("train", "train a classifier");
  train_args.attach(train);
  auto* tables = app.add_subcommand("reproduce-tables",
                                    "run the desk-scale experiment grid");
  tables_args.attach(tables);
  std::string subset;
  tables->add_option("--subset", subset, "tableI | tableII | tableIII | tableIV");

  auto* eval = app.add_subcommand("evaluate", "evaluate a stored checkpoint");
  octplaque::cli::EvaluateOptions eval_opts;
  std::string render_id, csv_path;
  eval->add_option("--weights", eval_opts.weights_dir, "weight store directory")
      ->required();
  eval->add_option("--manifest", eval_opts.manifest_path, "dataset manifest")
      ->required();
  eval->add_option("--report", eval_opts.out_path, "report JSON destination");
  eval->add_option("--render", render_id,
                   "pullback id to render (patient or patient/pullback)");
  eval->add_option("--csv", csv_path, "per-frame prediction CSV destination");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      octplaque::cli::cmd_generate(gen_args.resolve());
    } else if (train->parsed()) {
      octplaque::cli::cmd_train(train_args.resolve());
    } else if (tables->parsed()) {
      octplaque::cli::cmd_reproduce_tables(tables_args.resolve(), subset);
    } else if (eval->parsed()) {
      if (eval_opts.out_path.empty()) eval_opts.out_path = "report.json";
      if (!render_id.empty()) eval_opts.render_pullback = render_id;
      if (!csv_path.empty()) eval_opts.csv_path = csv_path;
      octplaque::cli::cmd_evaluate(eval_opts);
    }
  } catch (const octplaque::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
