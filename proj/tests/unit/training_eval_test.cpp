// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rgse/checkpoint.hpp"
#include "rgse/dataset.hpp"
#include "rgse/errors.hpp"
#include "rgse/evaluation.hpp"
#include "rgse/experiment.hpp"
#include "rgse/rng.hpp"
#include "rgse/trainer.hpp"
#include "rgse_oracles/oracles.hpp"

namespace rgse {
namespace {

namespace fs = std::filesystem;

TokenSeq words(const std::string& text) {
  std::istringstream in(text);
  TokenSeq out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rgse_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig toy_config() {
  ExperimentConfig c;
  c.model_kind = ModelKind::rnmt;
  c.encoder = EncoderKind::rgse;
  c.d_emb = 6;
  c.d_hidden = 4;
  c.d_dec = 8;
  c.d_att = 8;
  c.optimizer.learning_rate = 0.01;
  c.epochs = 2;
  c.synth.train = 30;
  c.synth.valid = 8;
  c.synth.test = 8;
  c.synth.max_len = 6;
  c.buckets = {4, 8};
  return c;
}

// ---- BLEU -------------------------------------------------------------------

TEST(Bleu, IdentityIsOne) {
  const std::vector<TokenSeq> c{words("a b c d e"), words("x y z w")};
  EXPECT_EQ(bleu4(c, c), 1.0);
}

TEST(Bleu, DisjointIsZero) {
  const std::vector<TokenSeq> c{words("a b c d")}, r{words("e f g h")};
  EXPECT_EQ(bleu4(c, r), 0.0);
}

TEST(Bleu, ClippedUnigramPrecision) {
  const std::vector<TokenSeq> c{words("the the the the")}, r{words("the cat")};
  const auto stats = bleu4_stats(c, r);
  EXPECT_EQ(stats.precision(1), 0.25);
  EXPECT_EQ(stats.precision(2), 0.0);
  EXPECT_EQ(stats.bleu(), 0.0);
}

TEST(Bleu, BrevityPenalty) {
  const std::vector<TokenSeq> c{words("a b c d")}, r{words("a b c d e f g h")};
  EXPECT_NEAR(bleu4(c, r), std::exp(1.0 - 8.0 / 4.0), 1e-15);
}

TEST(Bleu, Errors) {
  const std::vector<TokenSeq> none, one{words("a")}, two{words("a"), words("b")};
  EXPECT_THROW(bleu4(none, none), ArgumentError);
  EXPECT_THROW(bleu4(one, two), ArgumentError);
}

std::vector<TokenSeq> random_sentences(Rng& rng, std::size_t n) {
  std::vector<TokenSeq> out(n);
  for (auto& s : out) {
    const std::size_t len = 1 + rng.below(12);
    for (std::size_t i = 0; i < len; ++i) s.push_back(std::string(1, static_cast<char>('a' + rng.below(5))));
  }
  return out;
}

TEST(Bleu, MatchesCountingOracleOn50Pairs) {
  Rng rng(17);
  const auto c = random_sentences(rng, 50), r = random_sentences(rng, 50);
  const auto stats = bleu4_stats(c, r);
  const auto ref = oracle::bleu(c, r);
  for (std::size_t n = 0; n < 4; ++n) {
    EXPECT_EQ(static_cast<long long>(stats.matches[n]), ref.matched[n]);
    EXPECT_EQ(static_cast<long long>(stats.totals[n]), ref.total[n]);
  }
  EXPECT_NEAR(stats.bleu(), ref.score, 1e-12);
}

TEST(Bleu, PairOrderDoesNotMatter) {
  Rng rng(18);
  auto c = random_sentences(rng, 30), r = random_sentences(rng, 30);
  const double before = bleu4(c, r);
  std::vector<std::size_t> order(30);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<TokenSeq> pc, pr;
  for (auto i : order) {
    pc.push_back(c[i]);
    pr.push_back(r[i]);
  }
  EXPECT_NEAR(bleu4(pc, pr), before, 1e-15);
}

TEST(Bleu, SmoothedSentenceScoreIsPositive) {
  EXPECT_GT(smoothed_sentence_bleu(words("a b"), words("a c")), 0.0);
  EXPECT_NEAR(smoothed_sentence_bleu(words("a b c d"), words("a b c d")), 1.0, 1e-12);
}

// ---- buckets ----------------------------------------------------------------

TEST(Buckets, SingleBucketEqualsCorpus) {
  Rng rng(19);
  const auto c = random_sentences(rng, 20), r = random_sentences(rng, 20);
  std::vector<std::size_t> lengths(20, 5);
  const std::vector<std::size_t> bounds{100};
  const auto b = bucket_scores(c, r, lengths, bounds);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].count, 20u);
  EXPECT_EQ(*b[0].bleu, bleu4(c, r));
  EXPECT_EQ(b[1].count, 0u);
  EXPECT_FALSE(b[1].bleu.has_value());
}

TEST(Buckets, EmptySecondBucket) {
  const std::vector<TokenSeq> c{words("a b")}, r{words("a b")};
  const std::vector<std::size_t> lengths{7}, bounds{10, 20};
  const auto b = bucket_scores(c, r, lengths, bounds);
  EXPECT_EQ(b[0].count, 1u);
  EXPECT_EQ(b[1].count, 0u);
  EXPECT_FALSE(b[1].bleu);
}

TEST(Buckets, CountsPartitionTheTestSet) {
  Rng rng(20);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    const auto c = random_sentences(rng, n), r = random_sentences(rng, n);
    std::vector<std::size_t> lengths(n);
    for (auto& l : lengths) l = 1 + rng.below(70);
    const std::vector<std::size_t> bounds{10, 20, 30, 40, 50};
    std::size_t total = 0;
    for (const auto& b : bucket_scores(c, r, lengths, bounds)) total += b.count;
    EXPECT_EQ(total, n);
  }
}

TEST(Buckets, BoundariesMustIncrease) {
  const std::vector<TokenSeq> c{words("a")};
  const std::vector<std::size_t> lengths{1}, bad{10, 10};
  EXPECT_THROW(bucket_scores(c, c, lengths, bad), ArgumentError);
}

TEST(TokenAccuracy, PositionalMatches) {
  const std::vector<std::vector<int>> c{{1, 2, 3}, {4}}, r{{1, 9, 3, 5}, {4, 4}};
  EXPECT_DOUBLE_EQ(token_accuracy(c, r), 3.0 / 6.0);
}

TEST(EvalReport, CsvHasBucketRowsAndCorpusRow) {
  EvalReport report;
  report.bleu = 0.5;
  report.sentences = 3;
  report.buckets = {{0, 10, 3, 0.5}, {10, 0, 0, std::nullopt}};
  const auto csv = report.to_csv();
  EXPECT_EQ(csv.rfind("bucket,lower,upper,count,bleu\n", 0), 0u);
  EXPECT_NE(csv.find("corpus,0,inf,3,"), std::string::npos);
  EXPECT_NE(csv.find(",inf,0,\n"), std::string::npos);
  EXPECT_NE(report.to_svg().find("<svg"), std::string::npos);
}

// ---- data -------------------------------------------------------------------

TEST(Dataset, LongPairsDroppedAndVocabFromTraining) {
  auto c = toy_config();
  c.max_train_len = 4;
  c.synth.max_len = 8;
  const auto corpus = generate_task(c.synth);
  const auto data = build_dataset(corpus, c);
  EXPECT_LT(data.train.size(), corpus.train.size());
  for (const auto& ex : data.train) {
    EXPECT_LE(ex.source.size(), 4u);
    EXPECT_EQ(ex.source.size(), ex.graph.size());
  }
  EXPECT_EQ(data.test.size(), corpus.test.size());
}

TEST(Dataset, MismatchedFilesRejected) {
  const auto dir = fresh_dir("mismatch");
  std::ofstream(dir / "s.conllu") << "1\ta\t_\t_\t_\t_\t0\troot\t_\t_\n\n1\tb\t_\t_\t_\t_\t0\troot\t_\t_\n";
  std::ofstream(dir / "t.txt") << "x\n";
  auto c = ExperimentConfig::resolve(Config::parse("data.source = files\ndata.train_src = s.conllu\ndata.train_tgt = t.txt\n"),
                                     dir.string());
  EXPECT_THROW(load_corpus(c), ConfigError);
}

TEST(Dataset, BpeSplitsAndRejoins) {
  auto c = toy_config();
  c.bpe_merges = 3;
  const auto data = build_dataset(generate_task(c.synth), c);
  for (const auto& ex : data.train) {
    EXPECT_EQ(ex.graph.size(), ex.source.size());
    EXPECT_EQ(data.prep.target_words(ex.target), ex.reference);
  }
  const std::vector<std::string> pieces{"ab@@", "c", "d"};
  EXPECT_EQ(join_subwords(pieces), (std::vector<std::string>{"abc", "d"}));
}

// ---- training ---------------------------------------------------------------

TEST(Train, MemorizesOnePair) {
  auto c = toy_config();
  c.epochs = 200;
  c.batch_size = 1;
  ParallelCorpus corpus;
  corpus.train.push_back({DepGraph({"w4", "w5", "w6"}, {{1, 0, "d"}, {2, 1, "d"}}), {"v5", "v4", "v6"}});
  const auto data = build_dataset(corpus, c);
  auto model = build_model(c, data.prep.source_vocab.size(), data.prep.target_vocab.size());
  const auto result = train(*model, data.train, data.valid, c);
  ASSERT_EQ(result.epochs.size(), 201u);
  EXPECT_LT(result.epochs.back().train_loss, 0.01);
  const auto& ex = data.train[0];
  EXPECT_EQ(model->greedy_decode(ex.graph, ex.source, 10), ex.target);
}

TEST(Train, ZeroLearningRateKeepsLossConstant) {
  auto c = toy_config();
  c.optimizer.learning_rate = 0.0;
  c.epochs = 3;
  const auto data = build_dataset(generate_task(c.synth), c);
  auto model = build_model(c, data.prep.source_vocab.size(), data.prep.target_vocab.size());
  const auto result = train(*model, data.train, data.valid, c);
  for (const auto& e : result.epochs) EXPECT_EQ(e.train_loss, result.epochs[0].train_loss);
}

TEST(Train, UntrainedLossNearLogVocabulary) {
  for (auto kind : {ModelKind::rnmt, ModelKind::transformer}) {
    auto c = toy_config();
    c.model_kind = kind;
    c.d_model = 8;
    c.d_ff = 16;
    c.layers = 2;
    c.rgse_layers = LayerRange::parse("1-1");
    c.epochs = 0;
    const auto data = build_dataset(generate_task(c.synth), c);
    auto model = build_model(c, data.prep.source_vocab.size(), data.prep.target_vocab.size());
    const auto result = train(*model, data.train, data.valid, c);
    const double uniform = std::log(static_cast<double>(data.prep.target_vocab.size()));
    EXPECT_NEAR(result.epochs[0].train_loss, uniform, 0.2 * uniform);
  }
}

TEST(Train, SameSeedSameRun) {
  auto c = toy_config();
  c.encoder = EncoderKind::gcn;
  const auto data = build_dataset(generate_task(c.synth), c);
  auto a = build_model(c, data.prep.source_vocab.size(), data.prep.target_vocab.size());
  auto b = build_model(c, data.prep.source_vocab.size(), data.prep.target_vocab.size());
  const auto ra = train(*a, data.train, data.valid, c);
  const auto rb = train(*b, data.train, data.valid, c);
  EXPECT_EQ(loss_csv(ra), loss_csv(rb));
  for (const auto& [name, t] : a->params().entries()) {
    const auto& u = b->params().at(name);
    EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), u.data().begin())) << name;
  }
}

TEST(Train, NonFiniteLossAborts) {
  auto c = toy_config();
  const auto data = build_dataset(generate_task(c.synth), c);
  auto model = build_model(c, data.prep.source_vocab.size(), data.prep.target_vocab.size());
  model->params().at("dec.out.b")[4] = std::nan("");
  EXPECT_THROW(train(*model, data.train, data.valid, c), NumericError);
}

TEST(Train, LossCsvShape) {
  TrainResult r;
  r.epochs.push_back({0, 2.5, std::nullopt, 0, 0.0});
  r.epochs.push_back({1, 1.25, 1.5, 4, 0.1});
  const auto csv = loss_csv(r);
  EXPECT_EQ(csv.rfind("epoch,train_loss,valid_loss\n0,", 0), 0u);
  EXPECT_NE(csv.find("\n1,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

// ---- checkpoints and experiments --------------------------------------------

TEST(Checkpoint, RoundTripReproducesModel) {
  auto c = toy_config();
  const auto data = build_dataset(generate_task(c.synth), c);
  auto run = run_experiment(c, data);
  const auto dir = fresh_dir("ckpt");
  const auto path = (dir / "model.rgse").string();
  save_checkpoint(path, *run.model, data.prep);
  const auto back = load_checkpoint(path);
  EXPECT_EQ(back.config.fingerprint(), c.fingerprint());
  EXPECT_EQ(back.prep.source_vocab.tokens(), data.prep.source_vocab.tokens());
  for (const auto& [name, t] : run.model->params().entries()) {
    const auto& u = back.model->params().at(name);
    EXPECT_TRUE(std::equal(t.data().begin(), t.data().end(), u.data().begin())) << name;
  }
  for (const auto& ex : data.test) {
    EXPECT_EQ(back.model->greedy_decode(ex.graph, ex.source, 20), run.model->greedy_decode(ex.graph, ex.source, 20));
  }
}

TEST(Checkpoint, ShapeMismatchListed) {
  auto c = toy_config();
  const auto data = build_dataset(generate_task(c.synth), c);
  auto model = build_model(c, data.prep.source_vocab.size(), data.prep.target_vocab.size());
  const auto dir = fresh_dir("ckpt_bad");
  const auto path = (dir / "model.rgse").string();
  save_checkpoint(path, *model, data.prep);
  std::string text;
  {
    std::ifstream in(path, std::ios::binary);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto at = text.find("model.d_hidden = 4");
  ASSERT_NE(at, std::string::npos);
  text[at + 17] = '5';
  std::ofstream(path, std::ios::binary) << text;
  try {
    load_checkpoint(path);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("enc.bigru"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_checkpoint((dir / "absent").string()), ConfigError);
}

TEST(AbCompare, NeedsThreeTrials) {
  const auto c = toy_config();
  EXPECT_THROW(ab_compare(c, c, 2, {}), ArgumentError);
}

TEST(AbCompare, UnintendedDifferenceListed) {
  const auto a = toy_config();
  auto b = a;
  b.variant = RgseVariant::bi_past;
  b.d_hidden = 5;
  const std::vector<std::string> intended{"rgse.variant"};
  try {
    ab_compare(a, b, 3, intended);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("model.d_hidden"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("rgse.variant"), std::string::npos) << msg;
  }
}

TEST(AbCompare, IdenticalArmsIdenticalTrials) {
  auto c = toy_config();
  c.epochs = 1;
  const auto report = ab_compare(c, c, 3, {}, "left", "right");
  ASSERT_EQ(report.a.trials.size(), 3u);
  ASSERT_EQ(report.b.trials.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(report.a.trials[k].seed, c.seed + k);
    EXPECT_EQ(report.a.trials[k].loss_csv, report.b.trials[k].loss_csv);
    EXPECT_EQ(report.a.trials[k].accuracy, report.b.trials[k].accuracy);
  }
  EXPECT_TRUE(report.varied.empty());
  const auto csv = report.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_NE(report.summary().find("left"), std::string::npos);
}

TEST(AbCompare, MeanAndSampleDeviation) {
  const std::vector<double> v{1, 2, 3, 4};
  const auto [mean, sd] = mean_sd(v);
  EXPECT_DOUBLE_EQ(mean, 2.5);
  EXPECT_NEAR(sd, std::sqrt(5.0 / 3.0), 1e-15);
  const std::vector<double> one{7};
  EXPECT_EQ(mean_sd(one).second, 0.0);
}

}  // namespace
}  // namespace rgse
