// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "rgse/errors.hpp"

namespace rgse {

namespace {

constexpr const char* kMagic = "rgse-checkpoint 1";

void write_section(std::ostream& out, const std::string& name, const std::string& body) {
  out << "section " << name << ' ' << body.size() << '\n' << body << '\n';
}

std::string read_section(std::istream& in, const std::string& name) {
  std::string word, found;
  std::size_t bytes = 0;
  if (!(in >> word >> found >> bytes) || word != "section" || found != name) {
    throw ConfigError("checkpoint: expected section '" + name + "'");
  }
  in.get();
  std::string body(bytes, '\0');
  in.read(body.data(), static_cast<std::streamsize>(bytes));
  if (in.gcount() != static_cast<std::streamsize>(bytes)) throw ConfigError("checkpoint: truncated section '" + name + "'");
  in.get();
  return body;
}

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

void save_checkpoint(const std::string& path, const Seq2SeqModel& model, const Preprocessor& prep) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << kMagic << '\n';
  write_section(out, "config", model.config().to_config().to_text());
  write_section(out, "source_vocab", join_lines(prep.source_vocab.tokens()));
  write_section(out, "target_vocab", join_lines(prep.target_vocab.tokens()));
  write_section(out, "labels", join_lines(prep.labels));
  std::ostringstream merges;
  prep.bpe.save(merges);
  write_section(out, "bpe", merges.str());
  out << "section tensors\n";
  write_tensors(out, model.params());
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) throw ConfigError("'" + path + "' is not a checkpoint");

  Checkpoint ckpt;
  ckpt.config = ExperimentConfig::resolve(Config::parse(read_section(in, "config")), ".", false);
  ckpt.prep.source_vocab = Vocab::from_tokens(split_lines(read_section(in, "source_vocab")));
  ckpt.prep.target_vocab = Vocab::from_tokens(split_lines(read_section(in, "target_vocab")));
  ckpt.prep.labels = split_lines(read_section(in, "labels"));
  std::istringstream merges(read_section(in, "bpe"));
  ckpt.prep.bpe = BpeModel::load(merges);
  std::string line;
  in >> std::ws;
  std::getline(in, line);
  if (line != "section tensors") throw ConfigError("checkpoint: expected section 'tensors'");
  const auto tensors = read_tensors(in);

  ckpt.model = build_model(ckpt.config, ckpt.prep.source_vocab.size(), ckpt.prep.target_vocab.size(), ckpt.prep.labels);
  std::string problems;
  auto& params = ckpt.model->params().entries();
  for (auto& [name, tensor] : params) {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
      problems += "\n  " + name + ": missing from checkpoint";
    } else if (it->second.shape() != tensor.shape()) {
      problems += "\n  " + name + ": checkpoint " + shape_string(it->second.shape()) + " vs model " +
                  shape_string(tensor.shape());
    }
  }
  for (const auto& [name, tensor] : tensors) {
    if (!params.count(name)) problems += "\n  " + name + ": not a parameter of the configured model";
  }
  if (!problems.empty()) throw ConfigError("checkpoint does not match its config:" + problems);
  for (auto& [name, tensor] : params) {
    const auto stored = tensors.at(name).data();
    std::copy(stored.begin(), stored.end(), tensor.data().begin());
  }
  return ckpt;
}

}  // namespace rgse
