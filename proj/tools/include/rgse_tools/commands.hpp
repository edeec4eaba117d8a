// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rgse/config.hpp"

namespace rgse::tools {

/// Process exit codes; stable for scripts and CI.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfigError = 2,
  kExitNumericError = 3,
};

/// Record of one successful command run, appended as a JSON line to
/// <out>/manifest.jsonl. Earlier lines are never rewritten.
struct RunManifest {
  std::string command;
  /// Fingerprint of the resolved ExperimentConfig (the base config for ablations).
  std::string config_fingerprint;
  /// Paths of every file the run wrote, relative to the output directory.
  std::vector<std::string> artifacts;
  std::string started;
  std::string finished;
  std::string revision;
  /// Command-specific extras (ablation cells, skipped cells).
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

void append_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

/// Source revision baked in at build time, or "unknown".
std::string build_revision();

/// UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

/// One ablation row: a label and the config keys it overrides.
struct GridCell {
  std::string setting;
  Config delta;
};

/// Ablation grid file:
///
///   base = transformer.cfg      # relative to the grid file
///   [baseline Transformer]      # optional; defaults to the base config
///   rgse.layers = none
///   [cell 1-3]
///   rgse.layers = 1-3
///
/// Keys before the first section belong to the grid itself.
struct AblationGrid {
  std::filesystem::path base_config;
  GridCell baseline;
  std::vector<GridCell> cells;
};

/// Throws ParseError (with line number) on malformed lines, unknown grid
/// keys, duplicate keys within a section or a missing base.
AblationGrid parse_grid(std::string_view text, const std::filesystem::path& grid_dir);
AblationGrid load_grid(const std::filesystem::path& path);

/// Trains and evaluates the config; writes checkpoint.rgse, loss.csv,
/// eval.csv, eval.svg and config.cfg into `out_dir` and appends a manifest.
int cmd_train(const std::filesystem::path& config_path, const std::filesystem::path& out_dir);

/// Trains the baseline and every cell (up to `jobs` at a time, each in
/// cells/<id>/) and writes ablation.csv with columns
/// id,setting,steps_per_second,val_bleu,delta. Invalid cells are skipped and
/// logged; an empty grid yields a header-only CSV.
int cmd_ablate(const std::filesystem::path& grid_path, const std::filesystem::path& out_dir, std::size_t jobs);

/// Prints one PASS/FAIL line per check; exit 1 if any fails.
int cmd_verify(std::string_view suite, std::ostream& out);

/// Greedy-decodes every sentence of a CoNLL-U file, one line per sentence.
int cmd_translate(const std::filesystem::path& checkpoint, const std::filesystem::path& input, std::ostream& out);

inline constexpr std::string_view kAblationHeader = "id,setting,steps_per_second,val_bleu,delta";

}  // namespace rgse::tools
