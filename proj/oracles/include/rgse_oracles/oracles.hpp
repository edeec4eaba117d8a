// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

// Straight-line reference implementations used to check the library. They
// share no code with rgse::core: plain loops over std::vector<double>, long
// double accumulation, and their own edge bookkeeping.

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace rgse::oracle {

using Vec = std::vector<double>;

/// Row-major dense matrix.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

Vec matvec(const Mat& m, const Vec& x);
Mat matmul(const Mat& a, const Mat& b);
Vec add(const Vec& a, const Vec& b);
double sigmoid(double x);
Vec softmax(const Vec& x, double scale = 1.0);
Vec layer_norm(const Vec& x, const Vec& gain, const Vec& bias, double eps = 1e-6);
double cross_entropy(const Vec& logits, std::size_t target);

/// z = sig(Wz_s s + Wz_x x + bz), r = sig(Wr_s s + Wr_x x + br),
/// c = tanh(Wh_x x + Wh_s (r * s)), s' = z * s + (1 - z) * c.
struct Gru {
  Mat z_state, z_input;
  Vec z_bias;
  Mat r_state, r_input;
  Vec r_bias;
  Mat h_input, h_state;
};
Vec gru_step(const Gru& g, const Vec& x, const Vec& s);
/// Zero initial state; outputs in input order.
std::vector<Vec> gru_run(const Gru& g, const std::vector<Vec>& xs, bool reverse);

enum class Phi { sum, average, gated };
/// Reduction over `sources` (self included by the caller).
Vec phi(Phi mode, const std::vector<Vec>& sources, const Mat* gate_w = nullptr, const Vec* gate_b = nullptr);

Vec tau_normal(const Vec& s_fwd, const Vec& s_bwd, const Vec& h);
Vec tau_gated(const Vec& s_fwd, const Vec& s_bwd, const Vec& h, const Vec& omega_f, const Vec& psi_f,
              const Vec& omega_b, const Vec& psi_b);

enum class Variant { forward, bi_total, bi_past, bi_future };

/// Sources read by node t, ascending: itself plus every token joined to it by
/// an arc in either direction, restricted by variant. For the left-to-right
/// scan "past" means source < t; for the right-to-left scan source > t.
std::vector<std::size_t> sources(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& arcs,
                                 std::size_t t, Variant variant, bool right_to_left);

struct Rgse {
  Variant variant = Variant::bi_total;
  Phi phi_mode = Phi::sum;
  Mat gate_w;
  Vec gate_b;
  Gru fwd;
  Gru bwd;
};
struct RgseStates {
  std::vector<Vec> fwd;
  std::vector<Vec> bwd;
};
/// `arcs` are (dependent, head) pairs.
RgseStates rgse(const Rgse& p, const std::vector<Vec>& h,
                const std::vector<std::pair<std::size_t, std::size_t>>& arcs);

/// One query row of multi-head attention: per head softmax((Wq q).(Wk k_m) /
/// sqrt(d_h)) over visible keys, context sum_m a_m Wv k_m, heads concatenated
/// and projected by Wo.
struct Attention {
  std::vector<Mat> wq, wk, wv;
  Mat wo;
};
Vec attention_row(const Attention& a, const Vec& query, const std::vector<Vec>& keys,
                  const std::vector<bool>& visible = {});

/// relu(W_self h_v + b_self + sum over dependents d of (W_in h_d + b_label(d,v))
///      + W_out h_head + b_label(v,head)).
struct GcnNode {
  Mat w_in, w_out, w_self;
  Vec b_self;
};
Vec gcn_node(const GcnNode& g, const Vec& self, const std::vector<std::pair<Vec, Vec>>& dependents,
             const std::vector<std::pair<Vec, Vec>>& heads);

/// Corpus BLEU-4 by explicit n-gram string counting.
struct Bleu {
  std::array<long long, 4> matched{};
  std::array<long long, 4> total{};
  long long hyp_len = 0;
  long long ref_len = 0;
  double score = 0.0;
};
Bleu bleu(const std::vector<std::vector<std::string>>& hyps, const std::vector<std::vector<std::string>>& refs);

/// Preorder (children in ascending position) of the tree with head[i] = -1
/// marking the root; iterative, explicit stack.
std::vector<std::size_t> preorder(const std::vector<long>& head);

}  // namespace rgse::oracle
