// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "rgse/attention.hpp"
#include "rgse/autodiff.hpp"
#include "rgse/evaluation.hpp"
#include "rgse/gru.hpp"
#include "rgse/param_store.hpp"
#include "rgse/rgse_layer.hpp"
#include "rgse/rng.hpp"
#include "rgse/synth_corpus.hpp"

namespace {

using namespace rgse;

constexpr std::size_t kDim = 16;

DepGraph sentence_of_length(std::size_t len) {
  SynthSpec spec;
  spec.min_len = len;
  spec.max_len = len;
  spec.train = 1;
  spec.valid = 0;
  spec.test = 0;
  spec.root_first = false;
  return generate_task(spec).train.front().source;
}

std::vector<ad::Var> random_inputs(ad::Tape& tape, std::size_t len, std::size_t dim, Rng& rng) {
  std::vector<ad::Var> xs;
  for (std::size_t t = 0; t < len; ++t) {
    std::vector<double> v(dim);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    xs.push_back(tape.constant(std::move(v)));
  }
  return xs;
}

ad::Var total(std::span<const ad::Var> outputs) {
  std::vector<ad::Var> parts;
  for (const auto& o : outputs) parts.push_back(ad::sum(o));
  return ad::add_n(parts);
}

void BM_GruStep(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  ParamStore store(1);
  GruCell cell(store, "gru", dim, dim);
  Rng rng(2);
  for (auto _ : state) {
    ad::Tape tape;
    const auto xs = random_inputs(tape, 2, dim, rng);
    benchmark::DoNotOptimize(cell.step(tape, xs[0], xs[1]).value().data());
  }
}
BENCHMARK(BM_GruStep)->Arg(8)->Arg(16)->Arg(64);

void BM_BiGruEncode(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  ParamStore store(1);
  BiGru bigru(store, "bigru", kDim, kDim);
  Rng rng(2);
  for (auto _ : state) {
    ad::Tape tape;
    const auto xs = random_inputs(tape, len, kDim, rng);
    tape.backward(total(bigru.encode(tape, xs)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len));
}
BENCHMARK(BM_BiGruEncode)->Arg(8)->Arg(32);

// Forward and backward through one RGSE layer per variant.
void BM_RgseLayer(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto variant = static_cast<RgseVariant>(state.range(1));
  ParamStore store(1);
  RgseLayer layer(store, "rgse", {kDim, variant, PhiMode::gated, TauMode::gated});
  const DepGraph graph = sentence_of_length(len);
  Rng rng(2);
  for (auto _ : state) {
    ad::Tape tape;
    const auto xs = random_inputs(tape, len, kDim, rng);
    tape.backward(total(layer.forward(tape, xs, graph).eta));
  }
  state.SetLabel(std::string(to_string(variant)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len));
}
BENCHMARK(BM_RgseLayer)
    ->ArgsProduct({{8, 32},
                   {static_cast<int>(RgseVariant::forward), static_cast<int>(RgseVariant::bi_total),
                    static_cast<int>(RgseVariant::bi_past), static_cast<int>(RgseVariant::bi_future)}});

void BM_SelfAttentionBlock(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  ParamStore store(1);
  SelfAttentionBlock block(store, "attn", kDim, 2, 2 * kDim);
  Rng rng(2);
  for (auto _ : state) {
    ad::Tape tape;
    const auto xs = random_inputs(tape, len, kDim, rng);
    tape.backward(total(block.forward(tape, xs)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len));
}
BENCHMARK(BM_SelfAttentionBlock)->Arg(8)->Arg(32);

void BM_CorpusBleu(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<TokenSeq> candidates(n), references(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < 20; ++k) {
      references[i].push_back("w" + std::to_string(rng.below(50)));
      candidates[i].push_back("w" + std::to_string(rng.below(50)));
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(bleu4(candidates, references));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_CorpusBleu)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
