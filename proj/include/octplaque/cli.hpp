#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "octplaque/run_config.hpp"

namespace octplaque::cli {

/// Write the phantom dataset and its manifest under the configured data
/// root; prints the class distribution. Returns the manifest path.
std::filesystem::path cmd_generate(const RunConfig& cfg);

/// Patient split, optional k-fold, training, and artifact emission:
/// `<out>/<stamp>-<name>/{config.toml, history.csv, summary.json, weights/,
/// report.json}`. Returns the run directory.
std::filesystem::path cmd_train(const RunConfig& cfg);

struct EvaluateOptions {
  std::filesystem::path weights_dir;
  std::filesystem::path manifest_path;
  std::filesystem::path out_path;  // report JSON destination
  std::optional<std::string> render_pullback;  // "<patient>" or "<patient>/<pb>"
  std::optional<std::filesystem::path> csv_path;  // per-frame predictions
};

/// Deterministic evaluation of a stored checkpoint on a manifest; optional
/// pullback strip rendering and per-frame CSV dump.
void cmd_evaluate(const EvaluateOptions& opts);

/// Run the full desk-scale experiment grid and emit a markdown report with
/// the published clinical-study numbers alongside as non-comparable
/// references. `subset` limits the run to one table (tableI..tableIV).
std::filesystem::path cmd_reproduce_tables(const RunConfig& cfg,
                                           const std::string& subset = "");

}  // namespace octplaque::cli
