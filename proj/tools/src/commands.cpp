// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse_tools/commands.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rgse/checkpoint.hpp"
#include "rgse/conllu.hpp"
#include "rgse/dataset.hpp"
#include "rgse/errors.hpp"
#include "rgse/evaluation.hpp"
#include "rgse/experiment.hpp"
#include "rgse/trainer.hpp"
#include "rgse_tools/verify.hpp"

#ifndef RGSE_REVISION
#define RGSE_REVISION "unknown"
#endif

namespace fs = std::filesystem;

namespace rgse::tools {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_fingerprint"] = config_fingerprint;
  j["artifacts"] = artifacts;
  j["started"] = started;
  j["finished"] = finished;
  j["revision"] = revision;
  for (const auto& [key, value] : extra.items()) j[key] = value;
  return j;
}

void append_manifest(const fs::path& out_dir, const RunManifest& manifest) {
  std::ofstream out(out_dir / "manifest.jsonl", std::ios::app);
  if (!out) throw Error("cannot append to " + (out_dir / "manifest.jsonl").string());
  out << manifest.to_json().dump() << '\n';
}

std::string build_revision() { return RGSE_REVISION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

std::string directory_of(const fs::path& file) {
  const fs::path dir = file.parent_path();
  return dir.empty() ? "." : dir.string();
}

int exit_code_for(const char* command, std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const NumericError& e) {
    spdlog::error("{}: numeric failure: {}", command, e.what());
    return kExitNumericError;
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", command, e.what());
    return kExitConfigError;
  }
}

int guarded(const char* command, const std::function<int()>& body) {
  try {
    return body();
  } catch (...) {
    return exit_code_for(command, std::current_exception());
  }
}

void log_epoch(const EpochRecord& r) {
  if (r.valid_loss) {
    spdlog::info("epoch {:3d}  train loss {:.4f}  valid loss {:.4f}  ({:.1f}s)", r.epoch, r.train_loss, *r.valid_loss,
                 r.seconds);
  } else {
    spdlog::info("epoch {:3d}  train loss {:.4f}  ({:.1f}s)", r.epoch, r.train_loss, r.seconds);
  }
}

struct CellOutcome {
  bool ok = false;
  std::exception_ptr error;
  double steps_per_second = 0.0;
  double bleu_points = 0.0;
  std::string fingerprint;
  std::vector<std::string> artifacts;
};

CellOutcome run_cell(const Config& base, const GridCell& cell, const std::string& base_dir, const fs::path& out_dir,
                     const std::string& subdir) {
  CellOutcome outcome;
  try {
    ExperimentConfig config = ExperimentConfig::resolve(base.merged(cell.delta), base_dir);
    apply_seed_override(config);
    outcome.fingerprint = config.fingerprint();
    const Dataset data = build_dataset(load_corpus(config), config);
    if (data.valid.empty()) throw ConfigError("data: the ablation score needs a validation split");
    auto model = build_model(config, data.prep.source_vocab.size(), data.prep.target_vocab.size(), data.prep.labels);
    const TrainResult training = train(*model, data.train, data.valid, config);
    const EvalReport report = length_bucket_eval(*model, data.prep, data.valid, config.buckets);
    outcome.steps_per_second = training.steps_per_second();
    outcome.bleu_points = 100.0 * report.bleu;

    fs::create_directories(out_dir / subdir);
    const std::pair<std::string, std::string> files[] = {
        {"config.cfg", config.to_config().to_text()}, {"loss.csv", loss_csv(training)}, {"eval.csv", report.to_csv()}};
    for (const auto& [name, text] : files) {
      write_text(out_dir / subdir / name, text);
      outcome.artifacts.push_back(subdir + "/" + name);
    }
    outcome.ok = true;
  } catch (...) {
    outcome.error = std::current_exception();
  }
  return outcome;
}

std::string describe(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "unknown error";
}

/// Fixed four-decimal text of x, rounded half away from zero.
long long ten_thousandths(double x) { return std::llround(x * 10000.0); }

std::string fixed4(long long v) {
  char buf[48];
  const long long a = v < 0 ? -v : v;
  std::snprintf(buf, sizeof buf, "%s%lld.%04lld", v < 0 ? "-" : "", a / 10000, a % 10000);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

AblationGrid parse_grid(std::string_view text, const fs::path& grid_dir) {
  AblationGrid grid;
  grid.baseline.setting = "baseline";
  GridCell* current = nullptr;
  std::set<std::string> seen;
  bool has_base = false;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      const std::string header = trim(std::string_view(line).substr(1, line.size() - 2));
      const auto space = header.find(' ');
      const std::string kind = header.substr(0, space);
      const std::string label = space == std::string::npos ? "" : trim(std::string_view(header).substr(space + 1));
      if (kind == "baseline") {
        grid.baseline.setting = label.empty() ? "baseline" : label;
        current = &grid.baseline;
      } else if (kind == "cell") {
        if (label.empty()) throw ParseError("cell section needs a label, e.g. [cell 1-3]", line_no);
        grid.cells.push_back({label, {}});
        current = &grid.cells.back();
      } else {
        throw ParseError("unknown section '" + kind + "' (baseline, cell)", line_no);
      }
      seen.clear();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!seen.insert(key).second) throw ParseError("duplicate key '" + key + "'", line_no);
    if (current == nullptr) {
      if (key != "base") throw ParseError("unknown grid key '" + key + "' (base)", line_no);
      const fs::path base(value);
      grid.base_config = base.is_absolute() ? base : grid_dir / base;
      has_base = true;
    } else {
      current->delta.set(key, value);
    }
  }
  if (!has_base) throw ParseError("grid has no 'base = <config>' line", line_no);
  return grid;
}

AblationGrid load_grid(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open grid file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_grid(text.str(), directory_of(path));
}

int cmd_train(const fs::path& config_path, const fs::path& out_dir) {
  return guarded("train", [&] {
    RunManifest manifest;
    manifest.command = "train";
    manifest.started = utc_timestamp();
    manifest.revision = build_revision();

    ExperimentConfig config = ExperimentConfig::resolve(Config::load(config_path.string()), directory_of(config_path));
    apply_seed_override(config);
    manifest.config_fingerprint = config.fingerprint();
    spdlog::info("train: config {} (fingerprint {}), seed {}", config_path.string(), manifest.config_fingerprint,
                 config.seed);

    const Dataset data = build_dataset(load_corpus(config), config);
    spdlog::info("data: {} train / {} valid / {} test pairs, vocab {} -> {}", data.train.size(), data.valid.size(),
                 data.test.size(), data.prep.source_vocab.size(), data.prep.target_vocab.size());
    fs::create_directories(out_dir);
    RunResult run = run_experiment(config, data, log_epoch);
    spdlog::info("done: {} steps, {:.2f} steps/s, bleu {:.4f}, token accuracy {:.4f}", run.training.steps,
                 run.training.steps_per_second(), run.eval.bleu, run.eval.token_accuracy);

    save_checkpoint((out_dir / "checkpoint.rgse").string(), *run.model, data.prep);
    manifest.artifacts.push_back("checkpoint.rgse");
    const std::pair<std::string, std::string> files[] = {{"loss.csv", loss_csv(run.training)},
                                                         {"eval.csv", run.eval.to_csv()},
                                                         {"eval.svg", run.eval.to_svg()},
                                                         {"config.cfg", config.to_config().to_text()}};
    for (const auto& [name, text] : files) {
      write_text(out_dir / name, text);
      manifest.artifacts.push_back(name);
    }
    manifest.extra["steps_per_second"] = run.training.steps_per_second();
    manifest.finished = utc_timestamp();
    append_manifest(out_dir, manifest);
    return static_cast<int>(kExitOk);
  });
}

int cmd_ablate(const fs::path& grid_path, const fs::path& out_dir, std::size_t jobs) {
  return guarded("ablate", [&] {
    RunManifest manifest;
    manifest.command = "ablate";
    manifest.started = utc_timestamp();
    manifest.revision = build_revision();

    const AblationGrid grid = load_grid(grid_path);
    const Config base = Config::load(grid.base_config.string());
    const std::string base_dir = directory_of(grid.base_config);
    ExperimentConfig resolved_base = ExperimentConfig::resolve(base, base_dir);
    apply_seed_override(resolved_base);
    manifest.config_fingerprint = resolved_base.fingerprint();
    fs::create_directories(out_dir);

    std::string csv = std::string(kAblationHeader) + "\n";
    if (!grid.cells.empty()) {
      std::vector<const GridCell*> work{&grid.baseline};
      for (const auto& c : grid.cells) work.push_back(&c);
      std::vector<CellOutcome> outcomes(work.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) {
          spdlog::info("ablate: cell {} [{}] started", k, work[k]->setting);
          outcomes[k] = run_cell(base, *work[k], base_dir, out_dir, "cells/" + std::to_string(k));
          if (outcomes[k].ok) {
            spdlog::info("ablate: cell {} [{}] val bleu {:.4f}", k, work[k]->setting, outcomes[k].bleu_points);
          }
        }
      };
      const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, work.size()));
      std::vector<std::thread> pool;
      for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
      worker();
      for (auto& t : pool) t.join();

      if (!outcomes[0].ok) {
        spdlog::error("ablate: the baseline row failed, no deltas can be computed");
        std::rethrow_exception(outcomes[0].error);
      }
      const long long base_score = ten_thousandths(outcomes[0].bleu_points);
      nlohmann::json cells = nlohmann::json::array();
      nlohmann::json skipped = nlohmann::json::array();
      char sps[32];
      for (std::size_t k = 0; k < work.size(); ++k) {
        const CellOutcome& o = outcomes[k];
        if (!o.ok) {
          const std::string reason = describe(o.error);
          spdlog::warn("ablate: skipping cell {} [{}]: {}", k, work[k]->setting, reason);
          skipped.push_back({{"id", k}, {"setting", work[k]->setting}, {"reason", reason}});
          continue;
        }
        const long long score = ten_thousandths(o.bleu_points);
        std::snprintf(sps, sizeof sps, "%.2f", o.steps_per_second);
        csv += std::to_string(k) + "," + csv_field(work[k]->setting) + "," + sps + "," + fixed4(score) + "," +
               fixed4(score - base_score) + "\n";
        cells.push_back({{"id", k}, {"setting", work[k]->setting}, {"config_fingerprint", o.fingerprint}});
        for (const auto& a : o.artifacts) manifest.artifacts.push_back(a);
      }
      manifest.extra["cells"] = cells;
      manifest.extra["skipped"] = skipped;
    }
    write_text(out_dir / "ablation.csv", csv);
    manifest.artifacts.push_back("ablation.csv");
    manifest.finished = utc_timestamp();
    append_manifest(out_dir, manifest);
    return static_cast<int>(kExitOk);
  });
}

int cmd_verify(std::string_view suite_name, std::ostream& out) {
  Suite suite;
  try {
    suite = parse_suite(suite_name);
  } catch (const std::exception& e) {
    spdlog::error("verify: {}", e.what());
    return kExitConfigError;
  }
  try {
    const auto results = run_suite(suite);
    print_results(out, results);
    const bool ok = all_passed(results);
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    out << (ok ? "verify: all " : "verify: ") << (ok ? results.size() : failed)
        << (ok ? " checks passed\n" : " of " + std::to_string(results.size()) + " checks failed\n");
    return ok ? kExitOk : kExitVerifyFailed;
  } catch (const std::exception& e) {
    out << "FAIL " << suite_name << "  (check raised: " << e.what() << ")\n";
    return kExitVerifyFailed;
  }
}

int cmd_translate(const fs::path& checkpoint, const fs::path& input, std::ostream& out) {
  return guarded("translate", [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint.string());
    const auto graphs = read_conllu_file(input.string());
    for (const DepGraph& graph : graphs) {
      const Example ex = ckpt.prep.source_example(graph);
      const auto ids = ckpt.model->greedy_decode(ex.graph, ex.source, decode_limit(ckpt.config, ex.source.size()));
      const auto words = ckpt.prep.target_words(ids);
      for (std::size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
      out << '\n';
    }
    out.flush();
    return static_cast<int>(kExitOk);
  });
}

}  // namespace rgse::tools
