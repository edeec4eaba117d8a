// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rgse/attention.hpp"
#include "rgse/embedding.hpp"
#include "rgse/errors.hpp"
#include "rgse/gcn.hpp"
#include "rgse/gru.hpp"
#include "rgse/rng.hpp"
#include "rgse_oracles/oracles.hpp"

namespace rgse {
namespace {

std::vector<double> values(ad::Var v) { return {v.value().begin(), v.value().end()}; }

void randomize(ParamStore& store, std::uint64_t seed, double range = 0.7) {
  Rng rng(seed);
  for (auto& [_, t] : store.entries())
    for (double& x : t.data()) x = rng.uniform(-range, range);
}

oracle::Mat to_mat(const Tensor& t) { return {t.rows(), t.cols(), {t.data().begin(), t.data().end()}}; }
oracle::Vec to_vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }
oracle::Gru to_gru(const GruCell& c) {
  return {to_mat(*c.z_state), to_mat(*c.z_input), to_vec(*c.z_bias), to_mat(*c.r_state),
          to_mat(*c.r_input), to_vec(*c.r_bias),  to_mat(*c.h_input), to_mat(*c.h_state)};
}

TEST(Vocab, ReservedIdsAndUnknowns) {
  const std::vector<std::vector<std::string>> sents{{"a", "b"}, {"b", "c"}};
  const auto v = Vocab::build(sents);
  EXPECT_EQ(v.size(), 7u);
  EXPECT_EQ(v.id("a"), 4);
  EXPECT_EQ(v.id("zzz"), Vocab::kUnk);
  EXPECT_EQ(v.token(999), v.token(Vocab::kUnk));
  const std::vector<std::string> toks{"c", "a", "q"};
  const auto ids = v.encode(toks);
  EXPECT_EQ(ids, (std::vector<int>{6, 4, Vocab::kUnk}));
  EXPECT_EQ(v.decode(ids)[1], "a");
}

TEST(Embedding, OutOfRangeIdFallsBackToUnk) {
  ParamStore store(1);
  EmbeddingTable e(store, "E", 6, 3);
  ad::Tape tape;
  EXPECT_EQ(values(e.lookup(tape, 17)), values(e.lookup(tape, Vocab::kUnk)));
  EXPECT_EQ(values(e.lookup(tape, 5)), (std::vector<double>(e.table->data().begin() + 15, e.table->data().end())));
}

TEST(BiGru, LengthOneHasNoRecurrence) {
  ParamStore store(2);
  EmbeddingTable e(store, "E", 6, 3);
  BiGru enc(store, "enc", 3, 2);
  randomize(store, 3);
  ad::Tape tape;
  const std::vector<int> ids{4};
  const auto out = bigru_encode(tape, ids, e, enc);
  ASSERT_EQ(out.size(), 1u);
  const auto x = values(e.lookup(tape, 4));
  const auto f = oracle::gru_step(to_gru(enc.forward), x, {0, 0});
  const auto b = oracle::gru_step(to_gru(enc.backward), x, {0, 0});
  const auto h = values(out[0]);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(h[k], f[k], 1e-14);
    EXPECT_NEAR(h[2 + k], b[k], 1e-14);
  }
}

TEST(BiGru, ZeroEmbeddingsGiveZeroStates) {
  ParamStore store(2);
  EmbeddingTable e(store, "E", 6, 3);
  BiGru enc(store, "enc", 3, 2);
  for (double& x : e.table->data()) x = 0.0;
  ad::Tape tape;
  const std::vector<int> ids{4, 5, 4};
  for (const auto& v : bigru_encode(tape, ids, e, enc))
    for (double x : v.value()) EXPECT_EQ(x, 0.0);
}

TEST(BiGru, LengthThreeMatchesOracle) {
  ParamStore store(2);
  BiGru enc(store, "enc", 3, 4);
  randomize(store, 5);
  Rng rng(6);
  std::vector<oracle::Vec> xs(3, oracle::Vec(3));
  for (auto& x : xs)
    for (double& v : x) v = rng.uniform(-1, 1);
  ad::Tape tape;
  std::vector<ad::Var> inputs;
  for (const auto& x : xs) inputs.push_back(tape.constant(x));
  const auto out = enc.encode(tape, inputs);
  const auto f = oracle::gru_run(to_gru(enc.forward), xs, false);
  const auto b = oracle::gru_run(to_gru(enc.backward), xs, true);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_NEAR(out[t][k], f[t][k], 1e-12);
      EXPECT_NEAR(out[t][4 + k], b[t][k], 1e-12);
    }
  }
}

TEST(BiGru, HalvesAreCausal) {
  ParamStore store(2);
  BiGru enc(store, "enc", 2, 3);
  randomize(store, 7);
  std::vector<std::vector<double>> xs{{0.1, 0.2}, {-0.4, 0.9}, {0.3, -0.3}, {0.8, 0.1}};
  auto run = [&](const std::vector<std::vector<double>>& in) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& x : in) vars.push_back(tape.constant(x));
    std::vector<std::vector<double>> out;
    for (const auto& v : enc.encode(tape, vars)) out.push_back(values(v));
    return out;
  };
  const auto base = run(xs);
  auto changed = xs;
  changed[2] = {5.0, -5.0};
  const auto moved = run(changed);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t k = 0; k < 3; ++k) {
      if (t < 2) {
        EXPECT_EQ(base[t][k], moved[t][k]);
      }
      if (t > 2) {
        EXPECT_EQ(base[t][3 + k], moved[t][3 + k]);
      }
    }
  }
  EXPECT_NE(base[2][0], moved[2][0]);
}

TEST(BiGru, EmptySequenceRejected) {
  ParamStore store(2);
  EmbeddingTable e(store, "E", 6, 3);
  BiGru enc(store, "enc", 3, 2);
  ad::Tape tape;
  EXPECT_THROW(bigru_encode(tape, std::vector<int>{}, e, enc), ArgumentError);
}

TEST(PositionalEncoding, HandValues) {
  const auto p0 = positional_encoding(0, 6);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(p0[i], i % 2 == 0 ? 0.0 : 1.0);
  const auto p1 = positional_encoding(1, 4);
  EXPECT_EQ(p1[0], std::sin(1.0));
  EXPECT_EQ(p1[1], std::cos(1.0));
  EXPECT_NEAR(p1[2], std::sin(1.0 / 100.0), 1e-15);
  EXPECT_NE(positional_encoding(1, 4), positional_encoding(2, 4));
  EXPECT_THROW(positional_encoding(3, 5), ArgumentError);
}

oracle::Attention to_attention(const MultiHeadAttention& m) {
  oracle::Attention a;
  for (std::size_t h = 0; h < m.heads(); ++h) {
    a.wq.push_back(to_mat(*m.query[h]));
    a.wk.push_back(to_mat(*m.key[h]));
    a.wv.push_back(to_mat(*m.value[h]));
  }
  a.wo = to_mat(*m.output);
  return a;
}

TEST(Attention, SingleKeyReturnsProjectedValue) {
  ParamStore store(3);
  MultiHeadAttention mha(store, "att", 4, 2);
  ad::Tape tape;
  const std::vector<ad::Var> one{tape.constant(std::vector<double>{0.3, -0.1, 0.7, 0.2})};
  AttentionTrace trace;
  const auto out = mha.forward(tape, one, one, {}, &trace);
  EXPECT_EQ(trace[0][0][0], 1.0);
  EXPECT_EQ(trace[1][0][0], 1.0);
  const auto ref = oracle::attention_row(to_attention(mha), {0.3, -0.1, 0.7, 0.2}, {{0.3, -0.1, 0.7, 0.2}});
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(out[0][k], ref[k], 1e-12);
}

TEST(Attention, IdenticalInputsGiveUniformWeights) {
  ParamStore store(3);
  MultiHeadAttention mha(store, "att", 4, 1);
  ad::Tape tape;
  const std::vector<ad::Var> same(3, tape.constant(std::vector<double>{0.5, 0.5, -1, 2}));
  AttentionTrace trace;
  mha.forward(tape, same, same, {}, &trace);
  for (const auto& q : trace[0])
    for (double w : q) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(Attention, RowsMatchOracleAndSumToOne) {
  ParamStore store(3);
  MultiHeadAttention mha(store, "att", 4, 2);
  randomize(store, 4);
  Rng rng(5);
  std::vector<oracle::Vec> xs(3, oracle::Vec(4));
  for (auto& x : xs)
    for (double& v : x) v = rng.uniform(-1, 1);
  ad::Tape tape;
  std::vector<ad::Var> in;
  for (const auto& x : xs) in.push_back(tape.constant(x));
  const std::vector<bool> visible{true, false, true};
  AttentionTrace trace;
  const auto out = mha.forward(tape, in, in, [&](std::size_t) { return visible; }, &trace);
  for (std::size_t t = 0; t < 3; ++t) {
    const auto ref = oracle::attention_row(to_attention(mha), xs[t], xs, visible);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(out[t][k], ref[k], 1e-12);
    for (const auto& head : trace) {
      EXPECT_NEAR(std::accumulate(head[t].begin(), head[t].end(), 0.0), 1.0, 1e-12);
      EXPECT_EQ(head[t][1], 0.0);
    }
  }
}

TEST(Attention, WidthErrors) {
  ParamStore store(3);
  EXPECT_THROW(MultiHeadAttention(store, "bad", 6, 4), DimensionError);
  SelfAttentionBlock block(store, "blk", 4, 2, 8);
  ad::Tape tape;
  const std::vector<ad::Var> wrong{tape.constant(std::vector<double>{1, 2, 3})};
  EXPECT_THROW(block.forward(tape, wrong), DimensionError);
}

TEST(SelfAttentionBlock, OutputIsLayerNormalized) {
  ParamStore store(3);
  SelfAttentionBlock block(store, "blk", 4, 2, 8);
  ad::Tape tape;
  std::vector<ad::Var> in;
  for (int t = 0; t < 3; ++t) in.push_back(tape.constant(std::vector<double>{0.1 * t, 1, -1, 0.5}));
  for (const auto& v : block.forward(tape, in)) {
    const auto x = values(v);
    EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0), 0.0, 1e-9);
  }
}

DepGraph chain3() { return DepGraph({"a", "b", "c"}, {{0, 1, "nsubj"}, {2, 1, "obj"}}); }

TEST(Gcn, SelfLoopsWithIdentityReturnInput) {
  ParamStore store(3);
  GcnLayer gcn(store, "gcn", 2, 2, {}, 0.0);
  *gcn.w_self = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const DepGraph g({"a", "b"}, {});
  ad::Tape tape;
  const std::vector<ad::Var> in{tape.constant(std::vector<double>{0.5, 2}), tape.constant(std::vector<double>{0, 1})};
  const auto out = gcn.forward(tape, in, g, false);
  EXPECT_EQ(values(out[0]), (std::vector<double>{0.5, 2}));
  EXPECT_EQ(values(out[1]), (std::vector<double>{0, 1}));
}

TEST(Gcn, SingleEdgeHandExpansion) {
  ParamStore store(3);
  GcnLayer gcn(store, "gcn", 2, 2, {"dep"}, 0.0);
  *gcn.w_self = Tensor::matrix(2, 2, {1, 0, 0, 1});
  *gcn.w_in = Tensor::matrix(2, 2, {2, 0, 0, 3});
  *gcn.w_out = Tensor::matrix(2, 2, {0, 0, 0, 0});
  *gcn.label_bias.at("dep") = Tensor::vector({0.25, 0.5});
  const DepGraph g({"a", "b"}, {{0, 1, "dep"}});
  ad::Tape tape;
  const std::vector<ad::Var> in{tape.constant(std::vector<double>{1, 1}), tape.constant(std::vector<double>{1, 2})};
  const auto out = gcn.forward(tape, in, g, false);
  EXPECT_EQ(values(out[1]), (std::vector<double>{1 + 2 + 0.25, 2 + 3 + 0.5}));
  EXPECT_EQ(values(out[0]), (std::vector<double>{1 + 0.25, 1 + 0.5}));
}

TEST(Gcn, FullDropoutKeepsOnlySelfLoops) {
  ParamStore store(3);
  GcnLayer gcn(store, "gcn", 3, 3, {"nsubj", "obj"}, 1.0);
  randomize(store, 9);
  ParamStore bare(3);
  GcnLayer self_only(bare, "gcn", 3, 3, {"nsubj", "obj"}, 0.0);
  for (auto& [name, t] : bare.entries()) t = store.at(name);
  ad::Tape tape;
  std::vector<ad::Var> in;
  for (int t = 0; t < 3; ++t) in.push_back(tape.constant(std::vector<double>{0.2 * t, -0.5, 1}));
  Rng rng(1);
  const auto dropped = gcn.forward(tape, in, chain3(), true, &rng);
  const auto edgeless = self_only.forward(tape, in, DepGraph({"a", "b", "c"}, {}), false);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(values(dropped[t]), values(edgeless[t]));
}

TEST(Gcn, UnknownLabelUsesDefaultBias) {
  ParamStore store(3);
  GcnLayer gcn(store, "gcn", 1, 1, {}, 0.0);
  *gcn.w_self = Tensor::matrix(1, 1, {0});
  *gcn.w_in = Tensor::matrix(1, 1, {0});
  *gcn.w_out = Tensor::matrix(1, 1, {0});
  *gcn.default_bias = Tensor::vector({0.75});
  const DepGraph g({"a", "b"}, {{0, 1, "mystery"}});
  ad::Tape tape;
  const std::vector<ad::Var> in{tape.constant(std::vector<double>{1}), tape.constant(std::vector<double>{1})};
  const auto out = gcn.forward(tape, in, g, false);
  EXPECT_EQ(out[1][0], 0.75);
}

TEST(Gcn, DropoutNeedsRandomSource) {
  ParamStore store(3);
  GcnLayer gcn(store, "gcn", 1, 1, {}, 0.5);
  ad::Tape tape;
  const std::vector<ad::Var> in{tape.constant(std::vector<double>{1}), tape.constant(std::vector<double>{1})};
  EXPECT_THROW(gcn.forward(tape, in, DepGraph({"a", "b"}, {{0, 1, "x"}}), true), ArgumentError);
  EXPECT_NO_THROW(gcn.forward(tape, in, DepGraph({"a", "b"}, {{0, 1, "x"}}), false));
  EXPECT_THROW(GcnLayer(store, "bad", 1, 1, {}, 1.5), ArgumentError);
}

TEST(Gcn, EvalModeIsPermutationEquivariant) {
  ParamStore store(3);
  GcnLayer gcn(store, "gcn", 3, 3, {"nsubj", "obj"}, 0.2);
  randomize(store, 10);
  const std::vector<std::vector<double>> xs{{0.1, 0.5, -0.2}, {0.7, -0.3, 0.4}, {-0.6, 0.2, 0.9}};
  const std::vector<std::size_t> pi{2, 0, 1};  // old position -> new position
  const DepGraph g = chain3();
  std::vector<DepEdge> moved;
  for (const auto& e : g.edges()) moved.push_back({pi[e.dependent], pi[e.head], e.label});
  std::vector<std::vector<double>> pxs(3);
  for (std::size_t i = 0; i < 3; ++i) pxs[pi[i]] = xs[i];
  ad::Tape tape;
  std::vector<ad::Var> a, b;
  for (const auto& x : xs) a.push_back(tape.constant(x));
  for (const auto& x : pxs) b.push_back(tape.constant(x));
  const auto out = gcn.forward(tape, a, g, false);
  const auto pout = gcn.forward(tape, b, DepGraph({"x", "y", "z"}, moved), false);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(out[i][k], pout[pi[i]][k], 1e-14);
  }
}

}  // namespace
}  // namespace rgse
