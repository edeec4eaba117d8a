// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rgse/optimizer.hpp"
#include "rgse/rgse_layer.hpp"
#include "rgse/synth_corpus.hpp"

namespace rgse {

/// Flat "dotted.key = value" text. '#' starts a comment; blank lines are ignored.
class Config {
 public:
  Config() = default;
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void erase(const std::string& key) { values_.erase(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Keys of `delta` override ours.
  Config merged(const Config& delta) const;
  /// Keys whose values differ (or exist on one side only), sorted.
  std::vector<std::string> diff_keys(const Config& other) const;

  /// Canonical sorted text; parse(to_text()) round-trips.
  std::string to_text() const;
  /// 16 hex digits of FNV-1a over to_text().
  std::string fingerprint() const;

 private:
  std::map<std::string, std::string> values_;
};

enum class ModelKind { rnmt, transformer };
enum class EncoderKind { plain, rgse, gcn };
enum class DataSource { synthetic, files };

/// Inclusive 1-based encoder layer range, e.g. [1-3].
struct LayerRange {
  std::size_t first = 1;
  std::size_t last = 0;

  bool empty() const { return last < first; }
  bool contains(std::size_t layer) const { return layer >= first && layer <= last; }
  std::string to_string() const;
  /// "1-3", "2" or "none".
  static LayerRange parse(std::string_view text);

  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

struct DataFiles {
  std::string train_src, train_tgt;
  std::string valid_src, valid_tgt;
  std::string test_src, test_tgt;
};

/// Every axis an experiment can vary. Built from a Config via resolve(), which
/// reports every invalid field at once.
struct ExperimentConfig {
  ModelKind model_kind = ModelKind::rnmt;
  EncoderKind encoder = EncoderKind::rgse;

  std::size_t d_emb = 16;
  std::size_t d_hidden = 16;
  std::size_t d_dec = 32;
  std::size_t d_att = 32;
  std::size_t d_model = 16;
  std::size_t heads = 2;
  std::size_t d_ff = 32;
  std::size_t layers = 6;
  std::size_t dec_layers = 1;
  bool share_embeddings = false;

  RgseVariant variant = RgseVariant::bi_total;
  PhiMode phi = PhiMode::gated;
  TauMode tau = TauMode::gated;
  LayerRange rgse_layers{1, 3};

  std::size_t gcn_layers = 1;
  double gcn_edge_dropout = 0.2;

  OptimizerConfig optimizer;
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double clip_norm = 5.0;
  std::size_t eval_every = 1;
  std::uint64_t seed = 1;
  std::size_t max_train_len = 50;

  DataSource source = DataSource::synthetic;
  DataFiles files;
  std::size_t bpe_merges = 0;
  SynthSpec synth;

  std::vector<std::size_t> buckets{10, 20, 30, 40, 50};
  /// 0 means 2 * source length + 10.
  std::size_t decode_max_len = 0;

  /// Relative data paths resolve against `base_dir`. Throws ConfigError
  /// listing "field: problem" for every invalid field. `check_files` = false
  /// skips data file existence checks (e.g. when restoring a checkpoint).
  static ExperimentConfig resolve(const Config& config, const std::string& base_dir = ".", bool check_files = true);
  /// Full canonical config including defaults.
  Config to_config() const;
  std::string fingerprint() const { return to_config().fingerprint(); }
};

/// Applies RGSE_SEED from the environment, if set, to train.seed.
void apply_seed_override(ExperimentConfig& config);

}  // namespace rgse
