// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rgse/errors.hpp"
#include "rgse_tools/commands.hpp"

namespace rgse::tools {
namespace {

namespace fs = std::filesystem;

// Same sink as the command-line binary, so diagnostics can be captured.
class StderrLogger : public testing::Environment {
 public:
  void SetUp() override { spdlog::set_default_logger(spdlog::stderr_color_mt("rgse_test")); }
};
const auto* const kLogger = testing::AddGlobalTestEnvironment(new StderrLogger);

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rgse_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run_cli(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string(RGSE_CLI_PATH) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

constexpr const char* kTinyConfig =
    "model.kind = rnmt\n"
    "model.encoder = rgse\n"
    "model.d_emb = 4\n"
    "model.d_hidden = 4\n"
    "model.d_dec = 8\n"
    "model.d_att = 8\n"
    "train.epochs = 2\n"
    "train.lr = 0.02\n"
    "synth.train = 40\n"
    "synth.valid = 8\n"
    "synth.test = 8\n"
    "synth.max_len = 6\n"
    "eval.buckets = 4\n";

fs::path write_tiny(const fs::path& dir) {
  std::ofstream(dir / "tiny.cfg") << kTinyConfig;
  return dir / "tiny.cfg";
}

TEST(Cli, TrainWritesArtifactsAndManifest) {
  const auto dir = fresh_dir("train");
  const auto cfg = write_tiny(dir);
  ASSERT_EQ(run_cli("train --config " + cfg.string() + " --out " + (dir / "out").string()), 0);
  for (const char* f : {"checkpoint.rgse", "loss.csv", "eval.csv", "eval.svg", "config.cfg", "manifest.jsonl"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  const auto manifest = lines(slurp(dir / "out" / "manifest.jsonl"));
  ASSERT_EQ(manifest.size(), 1u);
  const auto j = nlohmann::json::parse(manifest[0]);
  EXPECT_EQ(j.at("command"), "train");
  EXPECT_EQ(j.at("config_fingerprint").get<std::string>().size(), 16u);
  EXPECT_FALSE(j.at("artifacts").empty());
}

TEST(Cli, RerunGivesIdenticalLossCsvAndAppendsManifest) {
  const auto dir = fresh_dir("rerun");
  const auto cfg = write_tiny(dir);
  ASSERT_EQ(cmd_train(cfg, dir / "a"), kExitOk);
  const auto first = slurp(dir / "a" / "loss.csv");
  ASSERT_EQ(cmd_train(cfg, dir / "a"), kExitOk);
  EXPECT_EQ(slurp(dir / "a" / "loss.csv"), first);
  EXPECT_EQ(lines(slurp(dir / "a" / "manifest.jsonl")).size(), 2u);
  ASSERT_EQ(cmd_train(cfg, dir / "b"), kExitOk);
  EXPECT_EQ(slurp(dir / "b" / "loss.csv"), first);
  EXPECT_EQ(slurp(dir / "b" / "eval.csv"), slurp(dir / "a" / "eval.csv"));
}

TEST(Cli, MissingCorpusExitsTwoNamingField) {
  const auto dir = fresh_dir("missing");
  std::ofstream(dir / "files.cfg") << "data.source = files\ndata.train_src = gone.conllu\ndata.train_tgt = gone.txt\n";
  testing::internal::CaptureStderr();
  const int code = cmd_train(dir / "files.cfg", dir / "out");
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, kExitConfigError);
  EXPECT_NE(err.find("data.train_src"), std::string::npos) << err;
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.jsonl"));
}

TEST(Cli, UnwritableOutputDirectoryFailsBeforeTraining) {
  const auto dir = fresh_dir("unwritable");
  const auto cfg = write_tiny(dir);
  testing::internal::CaptureStderr();
  const int code = cmd_train(cfg, "/dev/null/out");
  const std::string err = testing::internal::GetCapturedStderr();
  EXPECT_EQ(code, kExitConfigError);
  EXPECT_EQ(err.find("epoch"), std::string::npos) << err;
}

TEST(Cli, ExitCodes) {
  const auto dir = fresh_dir("codes");
  EXPECT_EQ(run_cli("train --config " + (dir / "absent.cfg").string() + " --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("verify --suite nonsense"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("train"), 2);
  EXPECT_EQ(run_cli("translate --ckpt " + (dir / "none.rgse").string() + " --in " + (dir / "x").string()), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST(Cli, NumericFailureExitsThree) {
  const auto dir = fresh_dir("numeric");
  std::ofstream(dir / "hot.cfg") << "model.kind = rnmt\nmodel.d_emb = 4\nmodel.d_hidden = 4\nmodel.d_dec = 4\n"
                                     "model.d_att = 4\ntrain.optimizer = sgd\ntrain.lr = 1e300\ntrain.clip_norm = 1e300\n"
                                     "train.epochs = 3\nsynth.train = 20\nsynth.valid = 4\nsynth.test = 4\n"
                                     "synth.max_len = 6\n";
  EXPECT_EQ(run_cli("train --config " + (dir / "hot.cfg").string() + " --out " + (dir / "out").string()), 3);
}

TEST(Cli, TranslateEmitsOneLinePerSentence) {
  const auto dir = fresh_dir("translate");
  const auto cfg = write_tiny(dir);
  ASSERT_EQ(cmd_train(cfg, dir / "out"), kExitOk);
  std::ofstream(dir / "in.conllu") << "1\tw4\t_\t_\t_\t_\t0\troot\t_\t_\n2\tw5\t_\t_\t_\t_\t1\tdep\t_\t_\n\n"
                                      "1\tw6\t_\t_\t_\t_\t0\troot\t_\t_\n\n"
                                      "1\tunseen\t_\t_\t_\t_\t2\tdep\t_\t_\n2\tw7\t_\t_\t_\t_\t0\troot\t_\t_\n";
  std::ostringstream out;
  EXPECT_EQ(cmd_translate(dir / "out" / "checkpoint.rgse", dir / "in.conllu", out), kExitOk);
  EXPECT_EQ(lines(out.str()).size(), 3u);
  std::ofstream(dir / "empty.conllu") << "";
  std::ostringstream none;
  EXPECT_EQ(cmd_translate(dir / "out" / "checkpoint.rgse", dir / "empty.conllu", none), kExitOk);
  EXPECT_TRUE(none.str().empty());
  EXPECT_EQ(run_cli("translate --ckpt " + (dir / "out" / "checkpoint.rgse").string() + " --in " +
                        (dir / "in.conllu").string(),
                    dir / "cli.txt"),
            0);
  EXPECT_EQ(slurp(dir / "cli.txt"), out.str());
}

TEST(Grid, ParseSectionsAndResolveBase) {
  const auto grid = parse_grid(
      "# comment\n"
      "base = sub/base.cfg\n"
      "[baseline Plain]\n"
      "model.encoder = plain\n"
      "[cell [1-3]]\n"
      "rgse.layers = 1-3\n"
      "[cell bare]\n",
      "/grids");
  EXPECT_EQ(grid.base_config, fs::path("/grids/sub/base.cfg"));
  EXPECT_EQ(grid.baseline.setting, "Plain");
  EXPECT_EQ(grid.baseline.delta.get("model.encoder"), "plain");
  ASSERT_EQ(grid.cells.size(), 2u);
  EXPECT_EQ(grid.cells[0].setting, "[1-3]");
  EXPECT_EQ(grid.cells[0].delta.get("rgse.layers"), "1-3");
  EXPECT_TRUE(grid.cells[1].delta.values().empty());
}

TEST(Grid, Errors) {
  EXPECT_THROW(parse_grid("[cell a]\nx = 1\n", "."), ParseError);
  EXPECT_THROW(parse_grid("base = b.cfg\n[cell a]\nx = 1\nx = 2\n", "."), ParseError);
  EXPECT_THROW(parse_grid("base = b.cfg\nunknown = 1\n", "."), ParseError);
  EXPECT_THROW(parse_grid("base = b.cfg\n[table a]\n", "."), ParseError);
  try {
    parse_grid("base = b.cfg\n[cell a]\nnot a pair\n", ".");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Ablate, EmptyGridWritesHeaderOnly) {
  const auto dir = fresh_dir("empty_grid");
  write_tiny(dir);
  std::ofstream(dir / "empty.grid") << "base = tiny.cfg\n";
  testing::internal::CaptureStderr();
  const int code = cmd_ablate(dir / "empty.grid", dir / "out", 1);
  testing::internal::GetCapturedStderr();
  ASSERT_EQ(code, kExitOk);
  EXPECT_EQ(slurp(dir / "out" / "ablation.csv"), std::string(kAblationHeader) + "\n");
}

TEST(Ablate, RowsDeltasAndSkippedCells) {
  const auto dir = fresh_dir("grid");
  write_tiny(dir);
  std::ofstream(dir / "g.grid") << "base = tiny.cfg\n"
                                   "[baseline Plain]\nmodel.encoder = plain\n"
                                   "[cell Sum]\nrgse.phi = sum\n"
                                   "[cell Broken]\nrgse.variant = sideways\n"
                                   "[cell Past]\nrgse.variant = bi_past\n";
  testing::internal::CaptureStderr();
  const int code = cmd_ablate(dir / "g.grid", dir / "out", 2);
  const std::string err = testing::internal::GetCapturedStderr();
  ASSERT_EQ(code, kExitOk) << err;
  EXPECT_NE(err.find("Broken"), std::string::npos) << err;
  const auto rows = lines(slurp(dir / "out" / "ablation.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], kAblationHeader);
  EXPECT_EQ(rows[1].rfind("0,Plain,", 0), 0u);
  EXPECT_EQ(rows[1].substr(rows[1].rfind(',') + 1), "0.0000");
  EXPECT_EQ(rows[2].rfind("1,Sum,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("3,Past,", 0), 0u);
  const auto j = nlohmann::json::parse(lines(slurp(dir / "out" / "manifest.jsonl")).at(0));
  EXPECT_EQ(j.at("command"), "ablate");
  ASSERT_EQ(j.at("skipped").size(), 1u);
  for (const char* k : {"0", "1", "3"}) EXPECT_TRUE(fs::exists(dir / "out" / "cells" / k / "loss.csv")) << k;
}

TEST(Manifest, AppendsOneJsonLinePerRun) {
  const auto dir = fresh_dir("manifest");
  RunManifest m;
  m.command = "train";
  m.config_fingerprint = "0123456789abcdef";
  m.artifacts = {"loss.csv"};
  m.started = utc_timestamp();
  m.finished = utc_timestamp();
  m.revision = build_revision();
  append_manifest(dir, m);
  m.command = "ablate";
  append_manifest(dir, m);
  const auto rows = lines(slurp(dir / "manifest.jsonl"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(nlohmann::json::parse(rows[0]).at("command"), "train");
  EXPECT_EQ(nlohmann::json::parse(rows[1]).at("command"), "ablate");
  EXPECT_EQ(m.started.size(), 20u);
  EXPECT_EQ(m.started.back(), 'Z');
}

TEST(ShippedConfigs, AllResolve) {
  for (const auto& entry : fs::directory_iterator(RGSE_CONFIG_DIR)) {
    if (entry.path().extension() == ".cfg") {
      EXPECT_NO_THROW(ExperimentConfig::resolve(Config::load(entry.path().string()))) << entry.path();
    } else if (entry.path().extension() == ".grid") {
      const auto grid = load_grid(entry.path());
      const auto base = Config::load(grid.base_config.string());
      EXPECT_NO_THROW(ExperimentConfig::resolve(base.merged(grid.baseline.delta))) << entry.path();
      for (const auto& cell : grid.cells) {
        EXPECT_NO_THROW(ExperimentConfig::resolve(base.merged(cell.delta))) << entry.path() << " " << cell.setting;
      }
    }
  }
}

}  // namespace
}  // namespace rgse::tools
