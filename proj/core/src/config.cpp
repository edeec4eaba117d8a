// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rgse/errors.hpp"
#include "rgse/rng.hpp"

namespace rgse {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++line_no;
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value', got '" + content + "'", line_no);
    std::string key = trim(std::string_view(content).substr(0, eq));
    std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (config.has(key)) throw ParseError("duplicate key '" + key + "'", line_no);
    config.values_[std::move(key)] = std::move(value);
  }
  return config;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

Config Config::merged(const Config& delta) const {
  Config out = *this;
  for (const auto& [k, v] : delta.values_) out.values_[k] = v;
  return out;
}

std::vector<std::string> Config::diff_keys(const Config& other) const {
  std::set<std::string> keys;
  for (const auto& [k, v] : values_) {
    const auto it = other.values_.find(k);
    if (it == other.values_.end() || it->second != v) keys.insert(k);
  }
  for (const auto& [k, v] : other.values_) {
    if (!has(k)) keys.insert(k);
  }
  return {keys.begin(), keys.end()};
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string Config::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_text())));
  return buf;
}

std::string LayerRange::to_string() const {
  if (empty()) return "none";
  return std::to_string(first) + "-" + std::to_string(last);
}

LayerRange LayerRange::parse(std::string_view text) {
  const std::string s = trim(text);
  if (s == "none" || s.empty()) return LayerRange{1, 0};
  auto number = [&](std::string_view part) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || v == 0) {
      throw ArgumentError("bad layer range '" + s + "' (expected e.g. 1-3, 2 or none)");
    }
    return v;
  };
  const auto dash = s.find('-');
  if (dash == std::string::npos) {
    const std::size_t v = number(s);
    return LayerRange{v, v};
  }
  LayerRange r{number(std::string_view(s).substr(0, dash)), number(std::string_view(s).substr(dash + 1))};
  if (r.last < r.first) throw ArgumentError("bad layer range '" + s + "': end before start");
  return r;
}

namespace {

// Reads typed fields, collecting every problem and tracking which keys were used.
class FieldReader {
 public:
  explicit FieldReader(const Config& config) : config_(config) {}

  template <typename T, typename Parse>
  void read(const std::string& key, T& target, Parse parse) {
    used_.insert(key);
    if (!config_.has(key)) return;
    try {
      target = parse(config_.get(key));
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }

  void size(const std::string& key, std::size_t& target, std::size_t min = 0) {
    read(key, target, [&](const std::string& v) {
      long long parsed = 0;
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
      if (ec != std::errc{} || ptr != v.data() + v.size()) throw ArgumentError("expected an integer, got '" + v + "'");
      if (parsed < static_cast<long long>(min)) throw ArgumentError("must be at least " + std::to_string(min));
      return static_cast<std::size_t>(parsed);
    });
  }

  void real(const std::string& key, double& target) {
    read(key, target, [](const std::string& v) {
      char* end = nullptr;
      const double parsed = std::strtod(v.c_str(), &end);
      if (v.empty() || end != v.c_str() + v.size()) throw ArgumentError("expected a number, got '" + v + "'");
      return parsed;
    });
  }

  void flag(const std::string& key, bool& target) {
    read(key, target, [](const std::string& v) {
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      throw ArgumentError("expected true or false, got '" + v + "'");
    });
  }

  void text(const std::string& key, std::string& target) {
    read(key, target, [](const std::string& v) { return v; });
  }

  void fail(const std::string& key, const std::string& problem) { errors_.push_back(key + ": " + problem); }

  void reject_unknown() {
    for (const auto& [k, v] : config_.values()) {
      if (!used_.count(k)) fail(k, "unknown key");
    }
  }

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  const Config& config_;
  std::set<std::string> used_;
  std::vector<std::string> errors_;
};

ModelKind parse_model_kind(std::string_view s) {
  if (s == "rnmt") return ModelKind::rnmt;
  if (s == "transformer") return ModelKind::transformer;
  throw ArgumentError("expected rnmt or transformer, got '" + std::string(s) + "'");
}

std::string_view model_kind_name(ModelKind k) { return k == ModelKind::rnmt ? "rnmt" : "transformer"; }

EncoderKind parse_encoder_kind(std::string_view s) {
  if (s == "plain") return EncoderKind::plain;
  if (s == "rgse") return EncoderKind::rgse;
  if (s == "gcn") return EncoderKind::gcn;
  throw ArgumentError("expected plain, rgse or gcn, got '" + std::string(s) + "'");
}

std::string_view encoder_kind_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::plain: return "plain";
    case EncoderKind::rgse: return "rgse";
    case EncoderKind::gcn: return "gcn";
  }
  return "?";
}

std::vector<std::size_t> parse_buckets(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    std::size_t b = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), b);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || b == 0) {
      throw ArgumentError("expected positive comma-separated integers, got '" + v + "'");
    }
    if (!out.empty() && b <= out.back()) throw ArgumentError("boundaries must be strictly increasing");
    out.push_back(b);
  }
  return out;
}

std::string join_buckets(const std::vector<std::size_t>& buckets) {
  std::string out;
  for (std::size_t i = 0; i < buckets.size(); ++i) out += (i ? "," : "") + std::to_string(buckets[i]);
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::resolve(const Config& config, const std::string& base_dir, bool check_files) {
  ExperimentConfig c;
  FieldReader f(config);
  f.read("model.kind", c.model_kind, parse_model_kind);
  f.read("model.encoder", c.encoder, parse_encoder_kind);
  f.size("model.d_emb", c.d_emb, 1);
  f.size("model.d_hidden", c.d_hidden, 1);
  f.size("model.d_dec", c.d_dec, 1);
  f.size("model.d_att", c.d_att, 1);
  f.size("model.d_model", c.d_model, 2);
  f.size("model.heads", c.heads, 1);
  f.size("model.d_ff", c.d_ff, 1);
  f.size("model.layers", c.layers, 1);
  f.size("model.dec_layers", c.dec_layers, 1);
  f.flag("model.share_embeddings", c.share_embeddings);

  f.read("rgse.variant", c.variant, parse_variant);
  f.read("rgse.phi", c.phi, parse_phi);
  f.read("rgse.tau", c.tau, parse_tau);
  f.read("rgse.layers", c.rgse_layers, LayerRange::parse);

  f.size("gcn.layers", c.gcn_layers, 1);
  f.real("gcn.edge_dropout", c.gcn_edge_dropout);

  f.read("train.optimizer", c.optimizer.kind, [](const std::string& v) {
    if (v == "adam") return OptimizerKind::adam;
    if (v == "sgd") return OptimizerKind::sgd;
    throw ArgumentError("expected adam or sgd, got '" + v + "'");
  });
  f.real("train.lr", c.optimizer.learning_rate);
  f.real("train.beta1", c.optimizer.beta1);
  f.real("train.beta2", c.optimizer.beta2);
  f.real("train.eps", c.optimizer.epsilon);
  f.size("train.epochs", c.epochs);
  f.size("train.batch_size", c.batch_size, 1);
  f.real("train.clip_norm", c.clip_norm);
  f.size("train.eval_every", c.eval_every);
  std::size_t seed = c.seed;
  f.size("train.seed", seed);
  c.seed = seed;
  f.size("train.max_len", c.max_train_len, 1);

  f.read("data.source", c.source, [](const std::string& v) {
    if (v == "synthetic") return DataSource::synthetic;
    if (v == "files") return DataSource::files;
    throw ArgumentError("expected synthetic or files, got '" + v + "'");
  });
  f.text("data.train_src", c.files.train_src);
  f.text("data.train_tgt", c.files.train_tgt);
  f.text("data.valid_src", c.files.valid_src);
  f.text("data.valid_tgt", c.files.valid_tgt);
  f.text("data.test_src", c.files.test_src);
  f.text("data.test_tgt", c.files.test_tgt);
  f.size("data.bpe_merges", c.bpe_merges);

  f.size("synth.vocab", c.synth.vocab);
  f.size("synth.min_len", c.synth.min_len);
  f.size("synth.max_len", c.synth.max_len);
  f.size("synth.train", c.synth.train);
  f.size("synth.valid", c.synth.valid);
  f.size("synth.test", c.synth.test);
  f.real("synth.head_bias", c.synth.head_bias);
  f.size("synth.max_arc", c.synth.max_arc);
  f.flag("synth.root_first", c.synth.root_first);
  f.read("synth.rule", c.synth.rule, parse_rule);
  std::size_t synth_seed = c.synth.seed;
  f.size("synth.seed", synth_seed);
  c.synth.seed = synth_seed;

  f.read("eval.buckets", c.buckets, parse_buckets);
  f.size("eval.decode_max_len", c.decode_max_len);
  f.reject_unknown();

  // Cross-field checks.
  if (c.gcn_edge_dropout < 0.0 || c.gcn_edge_dropout > 1.0) f.fail("gcn.edge_dropout", "must lie in [0, 1]");
  if (c.optimizer.learning_rate < 0.0) f.fail("train.lr", "must be non-negative");
  if (c.clip_norm <= 0.0) f.fail("train.clip_norm", "must be positive");
  if (c.model_kind == ModelKind::transformer) {
    if (c.d_model % 2 != 0) f.fail("model.d_model", "must be even (positional encoding and BiGRU halves)");
    if (c.d_model % c.heads != 0) {
      f.fail("model.heads", "must divide model.d_model (" + std::to_string(c.d_model) + ")");
    }
    if (c.encoder == EncoderKind::gcn) f.fail("model.encoder", "gcn is only available for rnmt");
    if (c.encoder == EncoderKind::rgse && !c.rgse_layers.empty() && c.rgse_layers.last > c.layers) {
      f.fail("rgse.layers", "range " + c.rgse_layers.to_string() + " exceeds model.layers = " + std::to_string(c.layers));
    }
  }
  if (c.source == DataSource::synthetic) {
    if (c.synth.vocab < 8) f.fail("synth.vocab", "must be at least 8");
    if (c.synth.min_len < 2) f.fail("synth.min_len", "must be at least 2");
    if (c.synth.min_len > c.synth.max_len) f.fail("synth.max_len", "must be at least synth.min_len");
    if (c.synth.train == 0) f.fail("synth.train", "must be positive");
    if (c.synth.head_bias < 0.0 || c.synth.head_bias > 1.0) f.fail("synth.head_bias", "must lie in [0, 1]");
  } else {
    namespace fs = std::filesystem;
    auto check_path = [&](const std::string& key, std::string& path, bool required) {
      if (path.empty()) {
        if (required) f.fail(key, "required when data.source = files");
        return;
      }
      fs::path p(path);
      if (p.is_relative()) p = fs::path(base_dir) / p;
      path = p.lexically_normal().string();
      if (check_files && !fs::exists(p)) f.fail(key, "file not found: " + path);
    };
    check_path("data.train_src", c.files.train_src, true);
    check_path("data.train_tgt", c.files.train_tgt, true);
    check_path("data.valid_src", c.files.valid_src, false);
    check_path("data.valid_tgt", c.files.valid_tgt, !c.files.valid_src.empty());
    check_path("data.test_src", c.files.test_src, false);
    check_path("data.test_tgt", c.files.test_tgt, !c.files.test_src.empty());
  }

  if (!f.errors().empty()) {
    std::string message = "invalid configuration:";
    for (const auto& e : f.errors()) message += "\n  " + e;
    throw ConfigError(message);
  }
  return c;
}

Config ExperimentConfig::to_config() const {
  Config c;
  c.set("model.kind", std::string(model_kind_name(model_kind)));
  c.set("model.encoder", std::string(encoder_kind_name(encoder)));
  c.set("model.d_emb", std::to_string(d_emb));
  c.set("model.d_hidden", std::to_string(d_hidden));
  c.set("model.d_dec", std::to_string(d_dec));
  c.set("model.d_att", std::to_string(d_att));
  c.set("model.d_model", std::to_string(d_model));
  c.set("model.heads", std::to_string(heads));
  c.set("model.d_ff", std::to_string(d_ff));
  c.set("model.layers", std::to_string(layers));
  c.set("model.dec_layers", std::to_string(dec_layers));
  c.set("model.share_embeddings", share_embeddings ? "true" : "false");
  c.set("rgse.variant", std::string(rgse::to_string(variant)));
  c.set("rgse.phi", std::string(rgse::to_string(phi)));
  c.set("rgse.tau", std::string(rgse::to_string(tau)));
  c.set("rgse.layers", rgse_layers.to_string());
  c.set("gcn.layers", std::to_string(gcn_layers));
  c.set("gcn.edge_dropout", format_double(gcn_edge_dropout));
  c.set("train.optimizer", optimizer.kind == OptimizerKind::adam ? "adam" : "sgd");
  c.set("train.lr", format_double(optimizer.learning_rate));
  c.set("train.beta1", format_double(optimizer.beta1));
  c.set("train.beta2", format_double(optimizer.beta2));
  c.set("train.eps", format_double(optimizer.epsilon));
  c.set("train.epochs", std::to_string(epochs));
  c.set("train.batch_size", std::to_string(batch_size));
  c.set("train.clip_norm", format_double(clip_norm));
  c.set("train.eval_every", std::to_string(eval_every));
  c.set("train.seed", std::to_string(seed));
  c.set("train.max_len", std::to_string(max_train_len));
  c.set("data.source", source == DataSource::synthetic ? "synthetic" : "files");
  if (source == DataSource::files) {
    c.set("data.train_src", files.train_src);
    c.set("data.train_tgt", files.train_tgt);
    if (!files.valid_src.empty()) c.set("data.valid_src", files.valid_src);
    if (!files.valid_tgt.empty()) c.set("data.valid_tgt", files.valid_tgt);
    if (!files.test_src.empty()) c.set("data.test_src", files.test_src);
    if (!files.test_tgt.empty()) c.set("data.test_tgt", files.test_tgt);
  } else {
    c.set("synth.vocab", std::to_string(synth.vocab));
    c.set("synth.min_len", std::to_string(synth.min_len));
    c.set("synth.max_len", std::to_string(synth.max_len));
    c.set("synth.train", std::to_string(synth.train));
    c.set("synth.valid", std::to_string(synth.valid));
    c.set("synth.test", std::to_string(synth.test));
    c.set("synth.head_bias", format_double(synth.head_bias));
    c.set("synth.max_arc", std::to_string(synth.max_arc));
    c.set("synth.root_first", synth.root_first ? "true" : "false");
    c.set("synth.rule", std::string(rgse::to_string(synth.rule)));
    c.set("synth.seed", std::to_string(synth.seed));
  }
  c.set("data.bpe_merges", std::to_string(bpe_merges));
  c.set("eval.buckets", join_buckets(buckets));
  c.set("eval.decode_max_len", std::to_string(decode_max_len));
  return c;
}

void apply_seed_override(ExperimentConfig& config) {
  const char* env = std::getenv("RGSE_SEED");
  if (env == nullptr || *env == '\0') return;
  std::uint64_t seed = 0;
  const std::string_view v(env);
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError("RGSE_SEED: expected an unsigned integer, got '" + std::string(v) + "'");
  }
  config.seed = seed;
}

}  // namespace rgse
