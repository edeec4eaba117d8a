// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse_tools/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "rgse/attention.hpp"
#include "rgse/autodiff.hpp"
#include "rgse/dep_graph.hpp"
#include "rgse/errors.hpp"
#include "rgse/evaluation.hpp"
#include "rgse/gcn.hpp"
#include "rgse/grad_check.hpp"
#include "rgse/gru.hpp"
#include "rgse/model.hpp"
#include "rgse/param_store.hpp"
#include "rgse/rgse_layer.hpp"
#include "rgse/rng.hpp"
#include "rgse/synth_corpus.hpp"
#include "rgse_oracles/oracles.hpp"

namespace rgse::tools {

namespace {

namespace orc = rgse::oracle;
using ad::Tape;
using ad::Var;

constexpr double kGradLimit = 1e-4;
constexpr double kOracleLimit = 1e-10;
constexpr double kLinearLimit = 1e-12;
constexpr double kOrderMargin = 1e-3;

const RgseVariant kVariants[] = {RgseVariant::forward, RgseVariant::bi_total, RgseVariant::bi_past,
                                 RgseVariant::bi_future};
const PhiMode kPhis[] = {PhiMode::sum, PhiMode::average, PhiMode::gated};
const TauMode kTaus[] = {TauMode::normal, TauMode::gated};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

CheckResult at_most(std::string name, double observed, double limit, std::string detail = {}) {
  return {std::move(name), observed <= limit, observed, limit, std::move(detail)};
}

CheckResult holds(std::string name, bool ok, std::string detail = {}) {
  return {std::move(name), ok, ok ? 1.0 : 0.0, 1.0, std::move(detail)};
}

std::string corner(RgseVariant v, PhiMode p, TauMode t) {
  return std::string(to_string(v)) + "." + std::string(to_string(p)) + "." + std::string(to_string(t));
}

orc::Mat to_mat(const Tensor& t) { return {t.rows(), t.cols(), {t.data().begin(), t.data().end()}}; }
orc::Vec to_vec(const Tensor& t) { return {t.data().begin(), t.data().end()}; }
orc::Vec value_of(const Var& v) { return {v.value().begin(), v.value().end()}; }

double max_diff(const orc::Vec& a, const orc::Vec& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (std::isnan(d)) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, d);
  }
  return worst;
}

double max_diff(const std::vector<Var>& a, const std::vector<orc::Vec>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_diff(value_of(a[i]), b[i]));
  return worst;
}

void randomize(ParamStore& store, std::uint64_t seed, double range = 0.8) {
  Rng rng(seed);
  for (auto& [name, t] : store.entries()) {
    for (double& x : t.data()) x = rng.uniform(-range, range);
  }
}

std::vector<orc::Vec> random_vectors(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<orc::Vec> out(n, orc::Vec(dim));
  for (auto& v : out) {
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
  }
  return out;
}

std::vector<Var> constants(Tape& tape, const std::vector<orc::Vec>& xs) {
  std::vector<Var> out;
  for (const auto& x : xs) out.push_back(tape.constant(x));
  return out;
}

orc::Gru oracle_gru(const GruCell& c) {
  return {to_mat(*c.z_state), to_mat(*c.z_input), to_vec(*c.z_bias), to_mat(*c.r_state),
          to_mat(*c.r_input), to_vec(*c.r_bias),  to_mat(*c.h_input), to_mat(*c.h_state)};
}

orc::Variant oracle_variant(RgseVariant v) {
  switch (v) {
    case RgseVariant::forward: return orc::Variant::forward;
    case RgseVariant::bi_total: return orc::Variant::bi_total;
    case RgseVariant::bi_past: return orc::Variant::bi_past;
    case RgseVariant::bi_future: return orc::Variant::bi_future;
  }
  return orc::Variant::bi_total;
}

orc::Phi oracle_phi(PhiMode m) {
  return m == PhiMode::sum ? orc::Phi::sum : m == PhiMode::average ? orc::Phi::average : orc::Phi::gated;
}

// "monkey likes eating bananas": monkey -> likes, eating -> likes, bananas -> eating.
struct LabeledArc {
  std::size_t dependent;
  std::size_t head;
  const char* label;
};
const LabeledArc kSentenceArcs[] = {{0, 1, "nsubj"}, {2, 1, "xcomp"}, {3, 2, "obj"}};

DepGraph sentence() {
  std::vector<DepEdge> edges;
  for (const auto& a : kSentenceArcs) edges.push_back({a.dependent, a.head, a.label});
  return DepGraph({"monkey", "likes", "eating", "bananas"}, std::move(edges), "monkey");
}

std::vector<std::pair<std::size_t, std::size_t>> sentence_arcs() {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& a : kSentenceArcs) out.emplace_back(a.dependent, a.head);
  return out;
}

DepGraph five_tokens() {
  return DepGraph({"a", "b", "c", "d", "e"},
                  {{0, 1, "nsubj"}, {2, 1, "obj"}, {3, 2, "amod"}, {4, 1, "amod"}}, "five");
}

/// Weighted sum of every output coordinate with fixed pseudo-random weights.
Var probe_loss(Tape& tape, const std::vector<Var>& outputs, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Var> terms;
  for (const Var& o : outputs) {
    orc::Vec w(o.size());
    for (double& x : w) x = rng.uniform(-1.0, 1.0);
    terms.push_back(ad::dot(o, tape.constant(w)));
  }
  return ad::add_n(terms);
}

CheckResult grad_result(std::string name, const LossFn& loss, ParamStore& store, std::uint64_t seed) {
  const GradCheckResult r = grad_check(loss, store, {1e-3, 1e-6, 40, seed});
  std::string detail = "worst " + r.worst_parameter + "[" + std::to_string(r.worst_index) +
                       "] analytic=" + num(r.worst_analytic) + " numeric=" + num(r.worst_numeric) +
                       ", entries=" + std::to_string(r.checked) +
                       (r.skipped_at_kink ? ", skipped at kinks=" + std::to_string(r.skipped_at_kink) : "");
  return {std::move(name), r.max_relative_error < kGradLimit, r.max_relative_error, kGradLimit, std::move(detail)};
}

ExperimentConfig tiny_rnmt() {
  ExperimentConfig c;
  c.model_kind = ModelKind::rnmt;
  c.d_emb = 6;
  c.d_hidden = 4;
  c.d_dec = 8;
  c.d_att = 8;
  c.seed = 3;
  return c;
}

ExperimentConfig tiny_hybrid() {
  ExperimentConfig c;
  c.model_kind = ModelKind::transformer;
  c.d_model = 8;
  c.heads = 2;
  c.d_ff = 16;
  c.layers = 2;
  c.dec_layers = 1;
  c.rgse_layers = {1, 1};
  c.seed = 4;
  return c;
}

const std::vector<int> kSource{4, 5, 6, 7, 8};
const std::vector<int> kTarget{4, 5, 6};
const std::vector<std::string> kLabels{"amod", "nsubj", "obj"};

CheckResult model_grad(const std::string& name, const ExperimentConfig& config, std::uint64_t seed) {
  auto model = build_model(config, 10, 9, kLabels);
  randomize(model->params(), seed + 1000, 0.8);
  const DepGraph graph = five_tokens();
  LossFn loss = [&](Tape& tape) { return model->loss(tape, graph, kSource, kTarget); };
  return grad_result(name, loss, model->params(), seed);
}

}  // namespace

Suite parse_suite(std::string_view name) {
  if (name == "grad") return Suite::grad;
  if (name == "oracle") return Suite::oracle;
  if (name == "invariant") return Suite::invariant;
  if (name == "all") return Suite::all;
  throw ArgumentError("unknown suite '" + std::string(name) + "' (grad, oracle, invariant, all)");
}

std::vector<CheckResult> grad_suite() {
  std::vector<CheckResult> out;
  Rng data(101);
  const DepGraph graph = five_tokens();

  {
    ParamStore store(11);
    BiGru bigru(store, "bigru", 4, 3);
    randomize(store, 12, 0.6);
    const auto xs = random_vectors(data, 5, 4);
    LossFn loss = [&](Tape& tape) { return probe_loss(tape, bigru.encode(tape, constants(tape, xs)), 13); };
    out.push_back(grad_result("grad.bigru", loss, store, 1));
  }
  {
    ParamStore store(21);
    SelfAttentionBlock block(store, "block", 8, 2, 16);
    randomize(store, 22, 0.6);
    const auto xs = random_vectors(data, 5, 8);
    LossFn loss = [&](Tape& tape) { return probe_loss(tape, block.forward(tape, constants(tape, xs)), 23); };
    out.push_back(grad_result("grad.attention_block", loss, store, 2));
  }
  {
    ParamStore store(31);
    DecoderBlock block(store, "dec", 8, 2, 16);
    randomize(store, 32, 0.6);
    const auto xs = random_vectors(data, 4, 8);
    const auto memory = random_vectors(data, 5, 8);
    LossFn loss = [&](Tape& tape) {
      return probe_loss(tape, block.forward(tape, constants(tape, xs), constants(tape, memory)), 33);
    };
    out.push_back(grad_result("grad.decoder_block", loss, store, 3));
  }
  {
    ParamStore store(41);
    GcnLayer gcn(store, "gcn", 6, 6, kLabels, 0.3);
    randomize(store, 42, 0.6);
    const auto xs = random_vectors(data, 5, 6);
    LossFn loss = [&](Tape& tape) {
      Rng dropout(43);
      return probe_loss(tape, gcn.forward(tape, constants(tape, xs), graph, true, &dropout), 44);
    };
    out.push_back(grad_result("grad.gcn", loss, store, 4));
  }

  std::uint64_t k = 0;
  for (RgseVariant v : kVariants) {
    for (PhiMode p : kPhis) {
      for (TauMode t : kTaus) {
        ++k;
        ParamStore store(100 + k);
        RgseLayer layer(store, "rgse", {4, v, p, t});
        randomize(store, 200 + k, 0.8);
        const auto h = random_vectors(data, 5, 4);
        LossFn loss = [&](Tape& tape) { return probe_loss(tape, layer.forward(tape, constants(tape, h), graph).eta, k); };
        out.push_back(grad_result("grad.rgse." + corner(v, p, t), loss, store, k));
      }
    }
  }

  ExperimentConfig plain = tiny_rnmt();
  plain.encoder = EncoderKind::plain;
  out.push_back(model_grad("grad.rnmt.plain", plain, 5));
  ExperimentConfig gcn = tiny_rnmt();
  gcn.encoder = EncoderKind::gcn;
  gcn.gcn_layers = 2;
  out.push_back(model_grad("grad.rnmt.gcn", gcn, 6));
  ExperimentConfig hybrid_plain = tiny_hybrid();
  hybrid_plain.rgse_layers = LayerRange::parse("none");
  out.push_back(model_grad("grad.hybrid.plain", hybrid_plain, 7));

  k = 0;
  for (RgseVariant v : kVariants) {
    for (PhiMode p : kPhis) {
      for (TauMode t : kTaus) {
        ++k;
        ExperimentConfig r = tiny_rnmt();
        r.variant = v;
        r.phi = p;
        r.tau = t;
        out.push_back(model_grad("grad.rnmt." + corner(v, p, t), r, 300 + k));
        ExperimentConfig h = tiny_hybrid();
        h.variant = v;
        h.phi = p;
        h.tau = t;
        out.push_back(model_grad("grad.hybrid." + corner(v, p, t), h, 400 + k));
      }
    }
  }
  return out;
}

std::vector<CheckResult> oracle_suite() {
  std::vector<CheckResult> out;
  Rng data(202);
  const DepGraph graph = sentence();
  const auto arcs = sentence_arcs();

  {
    ParamStore store(1);
    Tensor& w = store.add("W", {5, 7}, Init::uniform_fan_in);
    randomize(store, 2);
    const auto x = random_vectors(data, 1, 7)[0];
    Tape tape;
    const Var y = ad::matvec(tape.param(w), tape.constant(x));
    out.push_back(at_most("oracle.linear.matvec", max_diff(value_of(y), orc::matvec(to_mat(w), x)), kLinearLimit));
  }

  {
    ParamStore store(3);
    Tensor& gw = store.add("gate.W", {4, 4}, Init::uniform_fan_in);
    Tensor& gb = store.add("gate.b", {4}, Init::zeros);
    randomize(store, 4);
    const auto h = random_vectors(data, 4, 4);
    const orc::Mat ow = to_mat(gw);
    const orc::Vec ob = to_vec(gb);
    for (PhiMode mode : kPhis) {
      double worst = 0.0;
      for (std::size_t j = 0; j < graph.size(); ++j) {
        Tape tape;
        const auto states = constants(tape, h);
        const auto edges = incoming_edges(graph, j, Traversal::forward, EdgeFilter::total);
        const Var got = integrate(tape, PhiConfig{mode, &gw, &gb}, edges, states);
        std::vector<orc::Vec> srcs;
        for (std::size_t s : orc::sources(graph.size(), arcs, j, orc::Variant::bi_total, false)) srcs.push_back(h[s]);
        worst = std::max(worst, max_diff(value_of(got), orc::phi(oracle_phi(mode), srcs, &ow, &ob)));
      }
      const double limit = mode == PhiMode::gated ? kOracleLimit : kLinearLimit;
      out.push_back(at_most("oracle.phi." + std::string(to_string(mode)), worst, limit));
    }
  }

  {
    ParamStore store(5);
    Tensor& of = store.add("omega.f", {4}, Init::zeros);
    Tensor& pf = store.add("psi.f", {4}, Init::zeros);
    Tensor& ob = store.add("omega.b", {4}, Init::zeros);
    Tensor& pb = store.add("psi.b", {4}, Init::zeros);
    randomize(store, 6, 1.5);
    const auto v = random_vectors(data, 3, 4);
    Tape tape;
    const Var sf = tape.constant(v[0]), sb = tape.constant(v[1]), h = tape.constant(v[2]);
    const Var normal = combine(tape, ResidualConfig{TauMode::normal}, sf, sb, h);
    out.push_back(at_most("oracle.tau.normal", max_diff(value_of(normal), orc::tau_normal(v[0], v[1], v[2])),
                          kLinearLimit));
    const Var gated = combine(tape, ResidualConfig{TauMode::gated, &of, &pf, &ob, &pb}, sf, sb, h);
    const orc::Vec expect = orc::tau_gated(v[0], v[1], v[2], to_vec(of), to_vec(pf), to_vec(ob), to_vec(pb));
    out.push_back(at_most("oracle.tau.gated", max_diff(value_of(gated), expect), kOracleLimit));
  }

  {
    ParamStore store(7);
    GruCell cell(store, "cell", 5, 4);
    randomize(store, 8);
    const auto x = random_vectors(data, 1, 5)[0];
    const auto s = random_vectors(data, 1, 4)[0];
    Tape tape;
    const Var got = cell.step(tape, tape.constant(x), tape.constant(s));
    out.push_back(at_most("oracle.gru_step", max_diff(value_of(got), orc::gru_step(oracle_gru(cell), x, s)),
                          kOracleLimit));
  }

  {
    ParamStore store(9);
    MultiHeadAttention mha(store, "mha", 8, 2);
    randomize(store, 10);
    orc::Attention oa;
    for (std::size_t h = 0; h < mha.heads(); ++h) {
      oa.wq.push_back(to_mat(*mha.query[h]));
      oa.wk.push_back(to_mat(*mha.key[h]));
      oa.wv.push_back(to_mat(*mha.value[h]));
    }
    oa.wo = to_mat(*mha.output);
    const auto queries = random_vectors(data, 3, 8);
    const auto keys = random_vectors(data, 5, 8);
    auto visible = [](std::size_t q) {
      std::vector<bool> v(5, false);
      for (std::size_t m = 0; m <= q + 2 && m < 5; ++m) v[m] = true;
      return v;
    };
    for (bool masked : {false, true}) {
      Tape tape;
      KeyMaskFn mask;
      if (masked) mask = visible;
      const auto got = mha.forward(tape, constants(tape, queries), constants(tape, keys), mask);
      std::vector<orc::Vec> expect;
      for (std::size_t q = 0; q < queries.size(); ++q) {
        expect.push_back(orc::attention_row(oa, queries[q], keys, masked ? visible(q) : std::vector<bool>{}));
      }
      out.push_back(at_most(masked ? "oracle.attention_row.masked" : "oracle.attention_row", max_diff(got, expect),
                            kOracleLimit));
    }
  }

  {
    ParamStore store(11);
    GcnLayer gcn(store, "gcn", 5, 5, {"nsubj", "obj", "xcomp"}, 0.0);
    randomize(store, 12);
    const auto h = random_vectors(data, graph.size(), 5);
    Tape tape;
    const auto got = gcn.forward(tape, constants(tape, h), graph, false);
    orc::GcnNode node{to_mat(*gcn.w_in), to_mat(*gcn.w_out), to_mat(*gcn.w_self), to_vec(*gcn.label_bias.at("self"))};
    std::vector<orc::Vec> expect;
    for (std::size_t v = 0; v < graph.size(); ++v) {
      std::vector<std::pair<orc::Vec, orc::Vec>> deps, heads;
      for (const auto& a : kSentenceArcs) {
        const orc::Vec bias = to_vec(*gcn.label_bias.at(a.label));
        if (a.head == v) deps.emplace_back(h[a.dependent], bias);
        if (a.dependent == v) heads.emplace_back(h[a.head], bias);
      }
      expect.push_back(orc::gcn_node(node, h[v], deps, heads));
    }
    out.push_back(at_most("oracle.gcn_node", max_diff(got, expect), kOracleLimit));
  }

  std::uint64_t k = 0;
  for (RgseVariant v : kVariants) {
    for (PhiMode p : kPhis) {
      for (TauMode t : kTaus) {
        ++k;
        ParamStore store(500 + k);
        RgseLayer layer(store, "rgse", {4, v, p, t});
        randomize(store, 600 + k);
        const auto h = random_vectors(data, graph.size(), 4);
        Tape tape;
        const RgseOutput got = layer.forward(tape, constants(tape, h), graph);

        orc::Rgse op;
        op.variant = oracle_variant(v);
        op.phi_mode = oracle_phi(p);
        if (p == PhiMode::gated) {
          op.gate_w = to_mat(*layer.phi().gate_matrix);
          op.gate_b = to_vec(*layer.phi().gate_bias);
        }
        op.fwd = oracle_gru(layer.forward_cell());
        if (layer.backward_cell() != nullptr) op.bwd = oracle_gru(*layer.backward_cell());
        const orc::RgseStates want = orc::rgse(op, h, arcs);
        std::vector<orc::Vec> eta;
        const auto& tau = layer.residual();
        for (std::size_t i = 0; i < h.size(); ++i) {
          eta.push_back(t == TauMode::normal
                            ? orc::tau_normal(want.fwd[i], want.bwd[i], h[i])
                            : orc::tau_gated(want.fwd[i], want.bwd[i], h[i], to_vec(*tau.omega_forward),
                                             to_vec(*tau.psi_forward), to_vec(*tau.omega_backward),
                                             to_vec(*tau.psi_backward)));
        }
        const double worst = std::max({max_diff(got.s_forward, want.fwd), max_diff(got.s_backward, want.bwd),
                                       max_diff(got.eta, eta)});
        out.push_back(at_most("oracle.rgse_propagate." + corner(v, p, t), worst, kOracleLimit));
      }
    }
  }

  {
    ExperimentConfig c = tiny_rnmt();
    c.d_hidden = 3;
    RnmtModel model(c, 10, 9);
    randomize(model.params(), 13);
    const std::vector<int> ids{4, 5, 6, 7};
    Tape tape;
    const auto got = model.encode(tape, graph, ids);

    const Tensor& table = *model.source_embeddings().table;
    std::vector<orc::Vec> x;
    for (int id : ids) {
      const auto row = table.data().subspan(static_cast<std::size_t>(id) * table.cols(), table.cols());
      x.emplace_back(row.begin(), row.end());
    }
    const auto f = orc::gru_run(oracle_gru(model.base_encoder().forward), x, false);
    const auto b = orc::gru_run(oracle_gru(model.base_encoder().backward), x, true);
    std::vector<orc::Vec> h;
    for (std::size_t i = 0; i < x.size(); ++i) {
      orc::Vec hi = f[i];
      hi.insert(hi.end(), b[i].begin(), b[i].end());
      h.push_back(hi);
    }
    const RgseLayer& layer = *model.rgse();
    orc::Rgse op;
    op.variant = oracle_variant(c.variant);
    op.phi_mode = oracle_phi(c.phi);
    op.gate_w = to_mat(*layer.phi().gate_matrix);
    op.gate_b = to_vec(*layer.phi().gate_bias);
    op.fwd = oracle_gru(layer.forward_cell());
    op.bwd = oracle_gru(*layer.backward_cell());
    const auto s = orc::rgse(op, h, arcs);
    const auto& tau = layer.residual();
    std::vector<orc::Vec> eta;
    for (std::size_t i = 0; i < h.size(); ++i) {
      eta.push_back(orc::tau_gated(s.fwd[i], s.bwd[i], h[i], to_vec(*tau.omega_forward), to_vec(*tau.psi_forward),
                                   to_vec(*tau.omega_backward), to_vec(*tau.psi_backward)));
    }
    out.push_back(at_most("oracle.rnmt_encode", max_diff(got, eta), kOracleLimit));
  }

  {
    const std::vector<std::string> words{"a", "b", "c", "d", "e", "f"};
    std::vector<TokenSeq> hyps, refs;
    for (int s = 0; s < 50; ++s) {
      TokenSeq hyp(1 + data.below(12)), ref(1 + data.below(12));
      for (auto& w : hyp) w = words[data.below(words.size())];
      for (auto& w : ref) w = words[data.below(words.size())];
      hyps.push_back(hyp);
      refs.push_back(ref);
    }
    std::size_t count_mismatches = 0;
    double worst = 0.0;
    auto compare = [&](std::span<const TokenSeq> h, std::span<const TokenSeq> r) {
      const BleuStats got = bleu4_stats(h, r);
      const orc::Bleu want = orc::bleu({h.begin(), h.end()}, {r.begin(), r.end()});
      for (std::size_t n = 0; n < 4; ++n) {
        if (static_cast<long long>(got.matches[n]) != want.matched[n]) ++count_mismatches;
        if (static_cast<long long>(got.totals[n]) != want.total[n]) ++count_mismatches;
      }
      if (static_cast<long long>(got.candidate_length) != want.hyp_len) ++count_mismatches;
      if (static_cast<long long>(got.reference_length) != want.ref_len) ++count_mismatches;
      worst = std::max(worst, std::abs(got.bleu() - want.score));
    };
    for (std::size_t s = 0; s < hyps.size(); ++s) compare({&hyps[s], 1}, {&refs[s], 1});
    compare(hyps, refs);
    out.push_back(holds("oracle.bleu.counts", count_mismatches == 0,
                        std::to_string(count_mismatches) + " count mismatches over 50 pairs + corpus"));
    out.push_back(at_most("oracle.bleu.score", worst, kLinearLimit, "50 sentence scores + corpus score"));
  }

  {
    SynthSpec spec;
    spec.train = 30;
    spec.valid = 0;
    spec.test = 0;
    spec.root_first = false;
    spec.max_arc = 0;
    std::size_t mismatches = 0;
    for (const auto& pair : generate_task(spec).train) {
      std::vector<long> heads(pair.source.size(), -1);
      for (const auto& e : pair.source.edges()) heads[e.dependent] = static_cast<long>(e.head);
      if (tree_traversal(pair.source, TraversalRule::preorder) != orc::preorder(heads)) ++mismatches;
    }
    out.push_back(holds("oracle.traversal.preorder", mismatches == 0, std::to_string(mismatches) + " of 30 trees differ"));
  }
  return out;
}

namespace {

std::vector<CheckResult> structural_checks() {
  std::vector<CheckResult> out;
  Rng data(303);

  // Self edges only: every scan reads just its own position.
  const DepGraph edgeless({"a", "b", "c", "d", "e"}, {}, "edgeless");
  for (RgseVariant v : kVariants) {
    ParamStore store(700);
    RgseLayer layer(store, "rgse", {4, v, PhiMode::sum, TauMode::normal});
    randomize(store, 701);
    const auto h = random_vectors(data, 5, 4);
    Tape tape;
    const auto hv = constants(tape, h);
    const RgseStates got = layer.propagate(tape, hv, edgeless);
    const auto fwd = run_gru(tape, layer.forward_cell(), hv, false);
    std::vector<orc::Vec> f, b;
    for (const Var& s : fwd) f.push_back(value_of(s));
    if (layer.backward_cell() != nullptr) {
      for (const Var& s : run_gru(tape, *layer.backward_cell(), hv, true)) b.push_back(value_of(s));
    } else {
      b.assign(5, orc::Vec(4, 0.0));
    }
    const double worst = std::max(max_diff(got.forward, f), max_diff(got.backward, b));
    out.push_back(at_most("equiv.edgeless_bigru." + std::string(to_string(v)), worst, kOracleLimit));
  }

  {
    std::size_t violations = 0, nodes = 0;
    for (int g = 0; g < 40; ++g) {
      const std::size_t n = 1 + data.below(9);
      std::vector<DepEdge> edges;
      for (std::size_t d = 0; d < n; ++d) {
        for (std::size_t h = 0; h < n; ++h) {
          if (d != h && data.bernoulli(0.25)) edges.push_back({d, h, "dep"});
        }
      }
      const DepGraph graph(std::vector<std::string>(n, "x"), edges);
      for (std::size_t j = 0; j < n; ++j) {
        for (Traversal tr : {Traversal::forward, Traversal::backward}) {
          ++nodes;
          auto sources = [&](EdgeFilter f) {
            std::set<std::size_t> s;
            for (const EdgeRef& e : incoming_edges(graph, j, tr, f)) s.insert(e.source);
            return s;
          };
          const auto total = sources(EdgeFilter::total);
          const auto past = sources(EdgeFilter::past_only);
          const auto future = sources(EdgeFilter::future_only);
          std::set<std::size_t> both = past;
          both.insert(future.begin(), future.end());
          std::set<std::size_t> common;
          std::set_intersection(past.begin(), past.end(), future.begin(), future.end(),
                                std::inserter(common, common.begin()));
          if (both != total || common != std::set<std::size_t>{j}) ++violations;
        }
      }
    }
    out.push_back(holds("equiv.past_future_union", violations == 0,
                        std::to_string(violations) + " of " + std::to_string(nodes) + " node scans differ"));
  }

  {
    ExperimentConfig c;
    c.model_kind = ModelKind::transformer;
    c.d_model = 8;
    c.heads = 2;
    c.d_ff = 16;
    c.layers = 3;
    c.rgse_layers = LayerRange::parse("none");
    c.seed = 17;
    HybridTransformer hybrid(c, 10, 9);
    ExperimentConfig plain_cfg = c;
    plain_cfg.encoder = EncoderKind::plain;
    HybridTransformer plain_model(plain_cfg, 10, 9);

    ParamStore store(c.seed);
    EmbeddingTable embed(store, "embed.src", 10, 8);
    std::vector<std::unique_ptr<SelfAttentionBlock>> blocks;
    for (std::size_t l = 1; l <= c.layers; ++l) {
      blocks.push_back(std::make_unique<SelfAttentionBlock>(store, "enc.layer" + std::to_string(l), 8, 2, 16));
    }
    const DepGraph graph = five_tokens();
    Tape tape;
    const auto got = hybrid.encode_layers(tape, graph, kSource);
    const auto other = plain_model.encode_layers(tape, graph, kSource);
    std::vector<std::vector<Var>> want;
    std::vector<Var> x;
    for (std::size_t t = 0; t < kSource.size(); ++t) {
      x.push_back(ad::add(ad::scale(embed.lookup(tape, kSource[t]), std::sqrt(8.0)),
                          tape.constant(positional_encoding(t, 8))));
    }
    want.push_back(x);
    for (const auto& block : blocks) want.push_back(block->forward(tape, want.back()));
    bool identical = got.size() == want.size() && other.size() == want.size();
    for (std::size_t l = 0; identical && l < want.size(); ++l) {
      for (std::size_t t = 0; t < want[l].size(); ++t) {
        identical = identical && value_of(got[l][t]) == value_of(want[l][t]) &&
                    value_of(other[l][t]) == value_of(want[l][t]);
      }
    }
    out.push_back(holds("equiv.hybrid_empty_plain", identical, "every layer output compared bitwise"));
  }

  {
    ExperimentConfig c = tiny_rnmt();
    c.tau = TauMode::normal;
    RnmtModel model(c, 10, 9);
    for (auto& [name, t] : model.params().entries()) {
      if (name.rfind("enc.rgse.", 0) == 0) std::fill(t.data().begin(), t.data().end(), 0.0);
    }
    const DepGraph graph = five_tokens();
    Tape tape;
    const auto memory = model.encode(tape, graph, kSource);
    const auto h = bigru_encode(tape, kSource, model.source_embeddings(), model.base_encoder());
    std::vector<orc::Vec> want;
    for (const Var& v : h) {
      orc::Vec w = value_of(v);
      w.insert(w.end(), v.value().begin(), v.value().end());
      want.push_back(w);
    }
    out.push_back(at_most("equiv.rnmt_zero_rgse", max_diff(memory, want), kLinearLimit));
  }
  return out;
}

std::vector<CheckResult> order_checks() {
  std::vector<CheckResult> out;
  Rng data(404);
  // [a, b, c] with a -> b, c -> b, reordered to [b, a, c]; pi maps old to new positions.
  const DepGraph original({"a", "b", "c"}, {{0, 1, "nsubj"}, {2, 1, "obj"}}, "abc");
  const std::vector<std::size_t> pi{1, 0, 2};
  const DepGraph permuted({"b", "a", "c"}, {{pi[0], pi[1], "nsubj"}, {pi[2], pi[1], "obj"}}, "bac");
  const auto h = random_vectors(data, 3, 4);
  std::vector<orc::Vec> hp(3);
  for (std::size_t i = 0; i < 3; ++i) hp[pi[i]] = h[i];

  {
    ParamStore store(800);
    RgseLayer layer(store, "rgse", {4, RgseVariant::bi_total, PhiMode::gated, TauMode::gated});
    randomize(store, 801);
    Tape tape;
    const auto a = layer.forward(tape, constants(tape, h), original).eta;
    const auto b = layer.forward(tape, constants(tape, hp), permuted).eta;
    double largest = 0.0;
    for (std::size_t i = 0; i < 3; ++i) largest = std::max(largest, max_diff(value_of(a[i]), value_of(b[pi[i]])));
    out.push_back({"order.rgse_sensitive", largest >= kOrderMargin, largest, kOrderMargin,
                   "largest coordinate change after reordering (must be at least the limit)"});
  }
  {
    ParamStore store(802);
    GcnLayer gcn(store, "gcn", 4, 4, {"nsubj", "obj"}, 0.0);
    randomize(store, 803);
    Tape tape;
    const auto a = gcn.forward(tape, constants(tape, h), original, false);
    const auto b = gcn.forward(tape, constants(tape, hp), permuted, false);
    double largest = 0.0;
    bool exact = true;
    for (std::size_t i = 0; i < 3; ++i) {
      largest = std::max(largest, max_diff(value_of(a[i]), value_of(b[pi[i]])));
      exact = exact && value_of(a[i]) == value_of(b[pi[i]]);
    }
    out.push_back({"order.gcn_permutes", exact, largest, 0.0, "GCN output must be exactly the permuted output"});
  }
  {
    const std::size_t n = 7;
    ParamStore store(804);
    GcnLayer gcn(store, "gcn", 4, 4, {"dep"}, 0.0);
    randomize(store, 805);
    std::vector<DepEdge> edges;
    for (std::size_t i = 1; i < n; ++i) edges.push_back({i, data.below(i), "dep"});
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    data.shuffle(perm.begin(), perm.end());
    std::vector<DepEdge> moved;
    for (const DepEdge& e : edges) moved.push_back({perm[e.dependent], perm[e.head], e.label});
    const auto x = random_vectors(data, n, 4);
    std::vector<orc::Vec> xp(n);
    for (std::size_t i = 0; i < n; ++i) xp[perm[i]] = x[i];
    Tape tape;
    const auto a = gcn.forward(tape, constants(tape, x), DepGraph(std::vector<std::string>(n, "x"), edges), false);
    const auto b = gcn.forward(tape, constants(tape, xp), DepGraph(std::vector<std::string>(n, "x"), moved), false);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, max_diff(value_of(a[i]), value_of(b[perm[i]])));
    out.push_back(at_most("invariant.gcn_equivariance", worst, kLinearLimit));
  }
  return out;
}

std::vector<CheckResult> bleu_checks() {
  std::vector<CheckResult> out;
  const std::vector<TokenSeq> refs{{"the", "quick", "brown", "fox", "jumps", "over", "the", "dog"}};
  const double identity = bleu4(refs, refs);
  out.push_back(at_most("bleu.identity", std::abs(identity - 1.0), kLinearLimit, "bleu4 = " + num(identity)));
  const std::vector<TokenSeq> disjoint{{"a", "b", "c", "d", "e", "f", "g", "h"}};
  const double zero = bleu4(disjoint, refs);
  out.push_back(holds("bleu.disjoint", zero == 0.0, "bleu4 = " + num(zero)));
  const std::vector<TokenSeq> clip{{"the", "the", "the", "the"}};
  const std::vector<TokenSeq> cat{{"the", "cat"}};
  const double p1 = bleu4_stats(clip, cat).precision(1);
  out.push_back(holds("bleu.clip_unigram", p1 == 0.25, "unigram precision = " + num(p1)));
  return out;
}

}  // namespace

std::vector<CheckResult> invariant_suite() {
  std::vector<CheckResult> out = structural_checks();
  for (auto& r : order_checks()) out.push_back(std::move(r));
  for (auto& r : bleu_checks()) out.push_back(std::move(r));
  return out;
}

std::vector<CheckResult> run_suite(Suite suite) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> part) {
    for (auto& r : part) out.push_back(std::move(r));
  };
  if (suite == Suite::grad || suite == Suite::all) append(grad_suite());
  if (suite == Suite::oracle || suite == Suite::all) append(oracle_suite());
  if (suite == Suite::invariant || suite == Suite::all) append(invariant_suite());
  return out;
}

void print_results(std::ostream& out, const std::vector<CheckResult>& results) {
  for (const CheckResult& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << "  observed=" << num(r.observed) << " limit=" << num(r.limit);
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << '\n';
  }
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace rgse::tools
