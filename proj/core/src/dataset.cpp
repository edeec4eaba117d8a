// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "rgse/conllu.hpp"
#include "rgse/errors.hpp"

namespace rgse {

std::vector<std::vector<std::string>> read_token_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(w);
    out.push_back(std::move(tokens));
  }
  return out;
}

std::vector<std::string> join_subwords(std::span<const std::string> pieces) {
  std::vector<std::string> words;
  std::string current;
  bool open = false;
  for (const std::string& p : pieces) {
    const bool continues = p.size() >= kContinuationMarker.size() &&
                           p.compare(p.size() - kContinuationMarker.size(), std::string::npos, kContinuationMarker) == 0;
    current += continues ? p.substr(0, p.size() - kContinuationMarker.size()) : p;
    open = continues;
    if (!continues) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (open && !current.empty()) words.push_back(std::move(current));
  return words;
}

Example Preprocessor::source_example(const DepGraph& graph) const {
  Example ex;
  if (bpe.merges().empty()) {
    ex.graph = graph;
  } else {
    ex.graph = apply_subwords(graph, bpe.segment(graph.tokens()));
  }
  ex.source = source_vocab.encode(ex.graph.tokens());
  return ex;
}

Example Preprocessor::make_example(const DepGraph& graph, const std::vector<std::string>& target) const {
  Example ex = source_example(graph);
  ex.reference = target;
  if (bpe.merges().empty()) {
    ex.target = target_vocab.encode(target);
  } else {
    ex.target = target_vocab.encode(bpe.segment(target).pieces);
  }
  return ex;
}

std::vector<std::string> Preprocessor::target_words(std::span<const int> ids) const {
  const auto pieces = target_vocab.decode(ids);
  if (bpe.merges().empty()) return pieces;
  return join_subwords(pieces);
}

ParallelCorpus load_corpus(const ExperimentConfig& config) {
  if (config.source == DataSource::synthetic) return generate_task(config.synth);
  auto load_split = [](const std::string& src, const std::string& tgt, const std::string& name) {
    std::vector<SentencePair> pairs;
    if (src.empty()) return pairs;
    auto graphs = read_conllu_file(src);
    auto targets = read_token_lines(tgt);
    // A trailing newline-only line is not a sentence.
    while (targets.size() > graphs.size() && targets.back().empty()) targets.pop_back();
    if (graphs.size() != targets.size()) {
      throw ConfigError("data." + name + "_tgt: " + std::to_string(targets.size()) + " lines for " +
                        std::to_string(graphs.size()) + " source sentences");
    }
    for (std::size_t i = 0; i < graphs.size(); ++i) pairs.push_back({std::move(graphs[i]), std::move(targets[i])});
    return pairs;
  };
  ParallelCorpus corpus;
  corpus.train = load_split(config.files.train_src, config.files.train_tgt, "train");
  corpus.valid = load_split(config.files.valid_src, config.files.valid_tgt, "valid");
  corpus.test = load_split(config.files.test_src, config.files.test_tgt, "test");
  return corpus;
}

Dataset build_dataset(const ParallelCorpus& corpus, const ExperimentConfig& config) {
  if (corpus.train.empty()) throw ConfigError("training split is empty");
  Dataset data;
  Preprocessor& prep = data.prep;
  if (config.bpe_merges > 0) {
    std::vector<std::string> lines;
    for (const auto& pair : corpus.train) {
      std::string src, tgt;
      for (const auto& t : pair.source.tokens()) src += t + " ";
      for (const auto& t : pair.target) tgt += t + " ";
      lines.push_back(src);
      lines.push_back(tgt);
    }
    prep.bpe = BpeModel::learn(lines, config.bpe_merges);
  }

  std::set<std::string> labels;
  for (const auto& pair : corpus.train) {
    for (const auto& e : pair.source.edges()) labels.insert(e.label);
  }
  prep.labels.assign(labels.begin(), labels.end());

  // Vocabularies come from the segmented training split.
  std::vector<std::vector<std::string>> src_sentences, tgt_sentences;
  for (const auto& pair : corpus.train) {
    if (prep.bpe.merges().empty()) {
      src_sentences.push_back(pair.source.tokens());
      tgt_sentences.push_back(pair.target);
    } else {
      src_sentences.push_back(prep.bpe.segment(pair.source.tokens()).pieces);
      tgt_sentences.push_back(prep.bpe.segment(pair.target).pieces);
    }
  }
  if (config.share_embeddings) {
    std::vector<std::vector<std::string>> all = src_sentences;
    all.insert(all.end(), tgt_sentences.begin(), tgt_sentences.end());
    prep.source_vocab = Vocab::build(all);
    prep.target_vocab = prep.source_vocab;
  } else {
    prep.source_vocab = Vocab::build(src_sentences);
    prep.target_vocab = Vocab::build(tgt_sentences);
  }

  for (const auto& pair : corpus.train) {
    Example ex = prep.make_example(pair.source, pair.target);
    if (ex.source.size() > config.max_train_len || ex.target.size() > config.max_train_len) continue;
    data.train.push_back(std::move(ex));
  }
  if (data.train.empty()) throw ConfigError("train.max_len: every training pair exceeds the length limit");
  for (const auto& pair : corpus.valid) data.valid.push_back(prep.make_example(pair.source, pair.target));
  for (const auto& pair : corpus.test) data.test.push_back(prep.make_example(pair.source, pair.target));
  return data;
}

}  // namespace rgse
