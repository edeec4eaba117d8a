// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "rgse/errors.hpp"
#include "rgse/trainer.hpp"

namespace rgse {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

void accumulate(BleuStats& stats, const TokenSeq& candidate, const TokenSeq& reference) {
  stats.candidate_length += candidate.size();
  stats.reference_length += reference.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    const NgramCounts cand = count_ngrams(candidate, n);
    const NgramCounts ref = count_ngrams(reference, n);
    for (const auto& [gram, count] : cand) {
      const auto it = ref.find(gram);
      if (it != ref.end()) stats.matches[n - 1] += std::min(count, it->second);
      stats.totals[n - 1] += count;
    }
  }
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

double BleuStats::precision(std::size_t n) const {
  if (n < 1 || n > 4) throw ArgumentError("n-gram order must lie in 1..4");
  if (totals[n - 1] == 0) return 0.0;
  return static_cast<double>(matches[n - 1]) / static_cast<double>(totals[n - 1]);
}

double BleuStats::brevity_penalty() const {
  if (candidate_length == 0) return 0.0;
  if (candidate_length >= reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) / static_cast<double>(candidate_length));
}

double BleuStats::bleu() const {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const double p = precision(n);
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  return brevity_penalty() * std::exp(log_sum / 4.0);
}

BleuStats bleu4_stats(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  if (candidates.empty()) throw ArgumentError("bleu4: empty candidate list");
  if (candidates.size() != references.size()) {
    throw ArgumentError("bleu4: " + std::to_string(candidates.size()) + " candidates for " +
                        std::to_string(references.size()) + " references");
  }
  BleuStats stats;
  for (std::size_t i = 0; i < candidates.size(); ++i) accumulate(stats, candidates[i], references[i]);
  return stats;
}

double bleu4(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  return bleu4_stats(candidates, references).bleu();
}

double smoothed_sentence_bleu(const TokenSeq& candidate, const TokenSeq& reference) {
  BleuStats stats;
  accumulate(stats, candidate, reference);
  if (stats.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    log_sum += std::log((static_cast<double>(stats.matches[n]) + 1.0) / (static_cast<double>(stats.totals[n]) + 1.0));
  }
  return stats.brevity_penalty() * std::exp(log_sum / 4.0);
}

std::string BucketScore::label() const {
  return "(" + std::to_string(lower) + "," + (upper == 0 ? std::string("inf") : std::to_string(upper)) + "]";
}

std::vector<BucketScore> bucket_scores(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references,
                                       std::span<const std::size_t> source_lengths,
                                       std::span<const std::size_t> boundaries) {
  if (candidates.size() != references.size() || candidates.size() != source_lengths.size()) {
    throw ArgumentError("bucket_scores: candidate, reference and length lists differ in size");
  }
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (boundaries[i] == 0 || (i > 0 && boundaries[i] <= boundaries[i - 1])) {
      throw ArgumentError("bucket boundaries must be positive and strictly increasing");
    }
  }
  std::vector<BucketScore> buckets;
  std::size_t lower = 0;
  for (std::size_t b : boundaries) {
    buckets.push_back({lower, b, 0, std::nullopt});
    lower = b;
  }
  buckets.push_back({lower, 0, 0, std::nullopt});

  std::vector<std::vector<TokenSeq>> cands(buckets.size()), refs(buckets.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::size_t k = 0;
    while (k < boundaries.size() && source_lengths[i] > boundaries[k]) ++k;
    cands[k].push_back(candidates[i]);
    refs[k].push_back(references[i]);
  }
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    buckets[k].count = cands[k].size();
    if (!cands[k].empty()) buckets[k].bleu = bleu4(cands[k], refs[k]);
  }
  return buckets;
}

double token_accuracy(std::span<const std::vector<int>> candidates, std::span<const std::vector<int>> references) {
  if (candidates.size() != references.size()) throw ArgumentError("token_accuracy: list sizes differ");
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& r = references[i];
    for (std::size_t t = 0; t < r.size(); ++t) {
      if (t < c.size() && c[t] == r[t]) ++correct;
    }
    total += r.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::string EvalReport::to_csv() const {
  std::string out = "bucket,lower,upper,count,bleu\n";
  for (const auto& b : buckets) {
    out += b.label() + "," + std::to_string(b.lower) + "," + (b.upper == 0 ? "inf" : std::to_string(b.upper)) + "," +
           std::to_string(b.count) + "," + (b.bleu ? format_score(*b.bleu) : "") + "\n";
  }
  out += "corpus,0,inf," + std::to_string(sentences) + "," + format_score(bleu) + "\n";
  return out;
}

std::string EvalReport::to_svg() const {
  const double width = 480, height = 300, left = 50, right = 20, top = 20, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  const std::size_t n = buckets.size();
  auto x_of = [&](std::size_t k) { return left + (n <= 1 ? plot_w / 2 : plot_w * static_cast<double>(k) / static_cast<double>(n - 1)); };
  auto y_of = [&](double bleu) { return top + plot_h * (1.0 - bleu); };
  char buf[160];
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"300\">\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#888\"/>\n",
                left, top, plot_w, plot_h);
  svg += buf;
  std::string path;
  for (std::size_t k = 0; k < n; ++k) {
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"middle\">%s</text>\n",
                  x_of(k), height - bottom + 15, buckets[k].label().c_str());
    svg += buf;
    if (!buckets[k].bleu) {
      if (!path.empty()) svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"" + path + "\"/>\n";
      path.clear();
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x_of(k), y_of(*buckets[k].bleu));
    path += buf;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"#1f77b4\"/>\n", x_of(k),
                  y_of(*buckets[k].bleu));
    svg += buf;
  }
  if (!path.empty()) svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"" + path + "\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\">source length</text>\n"
                "<text x=\"12\" y=\"%g\" font-size=\"11\" transform=\"rotate(-90 12 %g)\">BLEU</text>\n",
                left + plot_w / 2, height - 10, top + plot_h / 2, top + plot_h / 2);
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

std::vector<Translation> translate_all(const Seq2SeqModel& model, const Preprocessor& prep,
                                       std::span<const Example> examples) {
  std::vector<Translation> out;
  out.reserve(examples.size());
  for (const Example& ex : examples) {
    Translation t;
    t.ids = model.greedy_decode(ex.graph, ex.source, decode_limit(model.config(), ex.source.size()));
    t.words = prep.target_words(t.ids);
    out.push_back(std::move(t));
  }
  return out;
}

EvalReport length_bucket_eval(const Seq2SeqModel& model, const Preprocessor& prep, const std::vector<Example>& examples,
                              std::span<const std::size_t> boundaries) {
  if (examples.empty()) throw ArgumentError("length_bucket_eval: no examples");
  const auto translations = translate_all(model, prep, examples);
  std::vector<TokenSeq> cands, refs;
  std::vector<std::vector<int>> cand_ids, ref_ids;
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    cands.push_back(translations[i].words);
    refs.push_back(examples[i].reference);
    cand_ids.push_back(translations[i].ids);
    ref_ids.push_back(examples[i].target);
    lengths.push_back(examples[i].graph.size());
  }
  EvalReport report;
  report.bleu = bleu4(cands, refs);
  report.buckets = bucket_scores(cands, refs, lengths, boundaries);
  report.token_accuracy = rgse::token_accuracy(cand_ids, ref_ids);
  report.loss = corpus_loss(model, examples);
  report.sentences = examples.size();
  report.fingerprint = model.config().fingerprint();
  return report;
}

}  // namespace rgse
