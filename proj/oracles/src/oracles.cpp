// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse_oracles/oracles.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace rgse::oracle {

Vec matvec(const Mat& m, const Vec& x) {
  if (m.cols != x.size()) throw std::invalid_argument("oracle matvec: shape mismatch");
  Vec y(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    long double acc = 0.0L;
    for (std::size_t c = 0; c < m.cols; ++c) acc += static_cast<long double>(m(r, c)) * x[c];
    y[r] = static_cast<double>(acc);
  }
  return y;
}

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("oracle matmul: shape mismatch");
  Mat out{a.rows, b.cols, Vec(a.rows * b.cols)};
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) {
      long double acc = 0.0L;
      for (std::size_t k = 0; k < a.cols; ++k) acc += static_cast<long double>(a(i, k)) * b(k, j);
      out.data[i * b.cols + j] = static_cast<double>(acc);
    }
  return out;
}

Vec add(const Vec& a, const Vec& b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

double sigmoid(double x) { return static_cast<double>(1.0L / (1.0L + std::exp(-static_cast<long double>(x)))); }

Vec softmax(const Vec& x, double scale) {
  long double peak = -INFINITY;
  for (double v : x) peak = std::max(peak, static_cast<long double>(v) * scale);
  long double z = 0.0L;
  std::vector<long double> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(x[i]) * scale - peak);
    z += e[i];
  }
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(e[i] / z);
  return out;
}

Vec layer_norm(const Vec& x, const Vec& gain, const Vec& bias, double eps) {
  long double mean = 0.0L;
  for (double v : x) mean += v;
  mean /= static_cast<long double>(x.size());
  long double var = 0.0L;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<long double>(x.size());
  const long double inv = 1.0L / std::sqrt(var + eps);
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<double>(gain[i] * (x[i] - mean) * inv + bias[i]);
  return out;
}

double cross_entropy(const Vec& logits, std::size_t target) {
  long double peak = -INFINITY;
  for (double v : logits) peak = std::max(peak, static_cast<long double>(v));
  long double z = 0.0L;
  for (double v : logits) z += std::exp(static_cast<long double>(v) - peak);
  return static_cast<double>(std::log(z) + peak - logits[target]);
}

Vec gru_step(const Gru& g, const Vec& x, const Vec& s) {
  const std::size_t d = s.size();
  const Vec zs = matvec(g.z_state, s), zx = matvec(g.z_input, x);
  const Vec rs = matvec(g.r_state, s), rx = matvec(g.r_input, x);
  Vec z(d), r(d), rs_prod(d);
  for (std::size_t i = 0; i < d; ++i) {
    z[i] = sigmoid(zs[i] + zx[i] + g.z_bias[i]);
    r[i] = sigmoid(rs[i] + rx[i] + g.r_bias[i]);
    rs_prod[i] = r[i] * s[i];
  }
  const Vec cx = matvec(g.h_input, x), cs = matvec(g.h_state, rs_prod);
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double c = std::tanh(cx[i] + cs[i]);
    out[i] = z[i] * s[i] + (1.0 - z[i]) * c;
  }
  return out;
}

std::vector<Vec> gru_run(const Gru& g, const std::vector<Vec>& xs, bool reverse) {
  const std::size_t n = xs.size();
  std::vector<Vec> out(n);
  Vec s(g.z_bias.size(), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t t = reverse ? n - 1 - k : k;
    s = gru_step(g, xs[t], s);
    out[t] = s;
  }
  return out;
}

Vec phi(Phi mode, const std::vector<Vec>& srcs, const Mat* gate_w, const Vec* gate_b) {
  if (srcs.empty()) throw std::invalid_argument("oracle phi: no sources");
  const std::size_t d = srcs.front().size();
  std::vector<long double> acc(d, 0.0L);
  for (const Vec& h : srcs) {
    if (mode == Phi::gated) {
      const Vec pre = matvec(*gate_w, h);
      for (std::size_t i = 0; i < d; ++i) acc[i] += sigmoid(pre[i] + (*gate_b)[i]) * h[i];
    } else {
      for (std::size_t i = 0; i < d; ++i) acc[i] += h[i];
    }
  }
  Vec out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = static_cast<double>(mode == Phi::average ? acc[i] / static_cast<long double>(srcs.size()) : acc[i]);
  }
  return out;
}

Vec tau_normal(const Vec& s_fwd, const Vec& s_bwd, const Vec& h) {
  Vec out;
  for (std::size_t i = 0; i < h.size(); ++i) out.push_back(s_fwd[i] + h[i]);
  for (std::size_t i = 0; i < h.size(); ++i) out.push_back(s_bwd[i] + h[i]);
  return out;
}

Vec tau_gated(const Vec& s_fwd, const Vec& s_bwd, const Vec& h, const Vec& omega_f, const Vec& psi_f,
              const Vec& omega_b, const Vec& psi_b) {
  Vec out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double l = sigmoid(omega_f[i] * s_fwd[i] + psi_f[i] * h[i]);
    out.push_back(l * s_fwd[i] + (1.0 - l) * h[i]);
  }
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double l = sigmoid(omega_b[i] * s_bwd[i] + psi_b[i] * h[i]);
    out.push_back(l * s_bwd[i] + (1.0 - l) * h[i]);
  }
  return out;
}

std::vector<std::size_t> sources(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& arcs,
                                 std::size_t t, Variant variant, bool right_to_left) {
  std::vector<bool> linked(n, false);
  linked[t] = true;
  for (const auto& [dep, head] : arcs) {
    if (dep == t) linked[head] = true;
    if (head == t) linked[dep] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < n; ++j) {
    if (!linked[j]) continue;
    if (j != t && (variant == Variant::bi_past || variant == Variant::bi_future)) {
      const bool past = right_to_left ? j > t : j < t;
      if ((variant == Variant::bi_past) != past) continue;
    }
    out.push_back(j);
  }
  return out;
}

RgseStates rgse(const Rgse& p, const std::vector<Vec>& h,
                const std::vector<std::pair<std::size_t, std::size_t>>& arcs) {
  const std::size_t n = h.size();
  const std::size_t d = h.front().size();
  auto scan = [&](const Gru& cell, bool right_to_left) {
    std::vector<Vec> states(n);
    Vec s(d, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = right_to_left ? n - 1 - k : k;
      std::vector<Vec> srcs;
      for (std::size_t j : sources(n, arcs, t, p.variant, right_to_left)) srcs.push_back(h[j]);
      s = gru_step(cell, phi(p.phi_mode, srcs, &p.gate_w, &p.gate_b), s);
      states[t] = s;
    }
    return states;
  };
  RgseStates out;
  out.fwd = scan(p.fwd, false);
  if (p.variant == Variant::forward) {
    out.bwd.assign(n, Vec(d, 0.0));
  } else {
    out.bwd = scan(p.bwd, true);
  }
  return out;
}

Vec attention_row(const Attention& a, const Vec& query, const std::vector<Vec>& keys, const std::vector<bool>& visible) {
  Vec concat;
  for (std::size_t h = 0; h < a.wq.size(); ++h) {
    const Vec q = matvec(a.wq[h], query);
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.size()));
    std::vector<long double> e(keys.size(), 0.0L);
    long double peak = -INFINITY;
    for (std::size_t m = 0; m < keys.size(); ++m) {
      if (!visible.empty() && !visible[m]) continue;
      const Vec k = matvec(a.wk[h], keys[m]);
      long double dot = 0.0L;
      for (std::size_t i = 0; i < q.size(); ++i) dot += static_cast<long double>(q[i]) * k[i];
      e[m] = dot * scale;
      peak = std::max(peak, e[m]);
    }
    long double z = 0.0L;
    for (std::size_t m = 0; m < keys.size(); ++m) {
      if (!visible.empty() && !visible[m]) continue;
      e[m] = std::exp(e[m] - peak);
      z += e[m];
    }
    std::vector<long double> ctx(a.wv[h].rows, 0.0L);
    for (std::size_t m = 0; m < keys.size(); ++m) {
      if (!visible.empty() && !visible[m]) continue;
      const Vec v = matvec(a.wv[h], keys[m]);
      for (std::size_t i = 0; i < v.size(); ++i) ctx[i] += e[m] / z * v[i];
    }
    for (long double c : ctx) concat.push_back(static_cast<double>(c));
  }
  return matvec(a.wo, concat);
}

Vec gcn_node(const GcnNode& g, const Vec& self, const std::vector<std::pair<Vec, Vec>>& dependents,
             const std::vector<std::pair<Vec, Vec>>& heads) {
  const Vec base = matvec(g.w_self, self);
  std::vector<long double> acc(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) acc[i] = static_cast<long double>(base[i]) + g.b_self[i];
  for (const auto& [h, b] : dependents) {
    const Vec m = matvec(g.w_in, h);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<long double>(m[i]) + b[i];
  }
  for (const auto& [h, b] : heads) {
    const Vec m = matvec(g.w_out, h);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += static_cast<long double>(m[i]) + b[i];
  }
  Vec out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i] > 0 ? static_cast<double>(acc[i]) : 0.0;
  return out;
}

Bleu bleu(const std::vector<std::vector<std::string>>& hyps, const std::vector<std::vector<std::string>>& refs) {
  Bleu b;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    b.hyp_len += static_cast<long long>(hyps[s].size());
    b.ref_len += static_cast<long long>(refs[s].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<std::string, long long> hc, rc;
      auto key = [n](const std::vector<std::string>& toks, std::size_t i) {
        std::string k;
        for (std::size_t j = 0; j < n; ++j) k += toks[i + j] + '\x1f';
        return k;
      };
      for (std::size_t i = 0; i + n <= hyps[s].size(); ++i) ++hc[key(hyps[s], i)];
      for (std::size_t i = 0; i + n <= refs[s].size(); ++i) ++rc[key(refs[s], i)];
      for (const auto& [k, c] : hc) {
        b.total[n - 1] += c;
        const auto it = rc.find(k);
        if (it != rc.end()) b.matched[n - 1] += std::min(c, it->second);
      }
    }
  }
  long double log_p = 0.0L;
  for (std::size_t n = 0; n < 4; ++n) {
    if (b.matched[n] == 0) return b;
    log_p += std::log(static_cast<long double>(b.matched[n]) / static_cast<long double>(b.total[n]));
  }
  long double bp = 1.0L;
  if (b.hyp_len < b.ref_len) bp = std::exp(1.0L - static_cast<long double>(b.ref_len) / static_cast<long double>(b.hyp_len));
  b.score = static_cast<double>(bp * std::exp(log_p / 4.0L));
  return b;
}

std::vector<std::size_t> preorder(const std::vector<long>& head) {
  const std::size_t n = head.size();
  std::vector<std::vector<std::size_t>> kids(n);
  std::size_t root = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (head[i] < 0) {
      root = i;
    } else {
      kids[static_cast<std::size_t>(head[i])].push_back(i);
    }
  }
  std::vector<std::size_t> order;
  if (root == n) return order;
  std::vector<std::size_t> stack{root};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    order.push_back(u);
    for (auto it = kids[u].rbegin(); it != kids[u].rend(); ++it) stack.push_back(*it);
  }
  return order;
}

}  // namespace rgse::oracle
