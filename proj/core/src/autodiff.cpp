// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rgse/errors.hpp"

namespace rgse::ad {

const Shape& Var::shape() const { return tape_->shape_of(id_); }

std::span<const double> Var::value() const { return tape_->value_of(id_); }

double Var::item() const {
  const auto v = value();
  if (v.size() != 1) throw DimensionError("item() on variable of shape " + shape_string(shape()));
  return v[0];
}

Var Tape::constant(Tensor value) {
  Node node;
  node.shape = value.shape();
  node.value = std::move(value.storage());
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(std::vector<double> values) {
  const std::size_t n = values.size();
  return constant(Tensor(Shape{n}, std::move(values)));
}

Var Tape::scalar(double value) { return constant(Tensor::scalar(value)); }

Var Tape::zeros(std::size_t n) { return constant(Tensor(Shape{n})); }

Var Tape::param(Tensor& parameter) {
  if (auto it = param_nodes_.find(&parameter); it != param_nodes_.end()) return Var(this, it->second);
  Node node;
  node.shape = parameter.shape();
  node.value.assign(parameter.data().begin(), parameter.data().end());
  node.param = &parameter;
  node.needs_grad = true;
  nodes_.push_back(std::move(node));
  param_nodes_.emplace(&parameter, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Shape shape, std::vector<double> value, std::span<const Var> parents, BackwardFn fn) {
  Node node;
  node.shape = std::move(shape);
  node.value = std::move(value);
  for (const Var& p : parents) {
    if (&p.tape() != this) throw StateError("operand recorded on a different tape");
    node.needs_grad = node.needs_grad || nodes_[p.id()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::span<double> Tape::grad_of(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::backward(Var loss) {
  if (backward_done_) throw StateError("backward() already ran on this tape");
  if (loss.size() != 1) throw DimensionError("backward() needs a scalar loss, got " + shape_string(loss.shape()));
  backward_done_ = true;
  grad_of(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad.empty()) continue;
    if (node.backward) node.backward(*this, i);
  }
  for (Node& node : nodes_) {
    if (node.param == nullptr || node.grad.empty()) continue;
    node.param->enable_grad();
    auto dst = node.param->grad();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += node.grad[k];
  }
}

std::vector<double> Tape::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (node.grad.empty()) return std::vector<double>(node.value.size(), 0.0);
  return node.grad;
}

namespace {

bool is_scalar(const Var& v) { return v.size() == 1 && v.shape().size() <= 1; }

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_rank(const char* op, const Var& v, std::size_t rank) {
  if (v.shape().size() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(v.shape()));
  }
}

enum class BinaryKind { add, sub, mul };

Var binary(BinaryKind kind, const char* name, Var a, Var b) {
  Tape& t = a.tape();
  const bool a_scalar = is_scalar(a) && !is_scalar(b);
  const bool b_scalar = is_scalar(b) && !is_scalar(a);
  if (!a_scalar && !b_scalar) require_same_shape(name, a, b);
  const Shape shape = a_scalar ? b.shape() : a.shape();
  const std::size_t n = element_count(shape);
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[a_scalar ? 0 : i];
    const double y = bv[b_scalar ? 0 : i];
    switch (kind) {
      case BinaryKind::add: out[i] = x + y; break;
      case BinaryKind::sub: out[i] = x - y; break;
      case BinaryKind::mul: out[i] = x * y; break;
    }
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(shape, std::move(out), {a, b}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    const auto av2 = tp.value_of(ia);
    const auto bv2 = tp.value_of(ib);
    if (tp.needs_grad(ia)) {
      auto ga = tp.grad_of(ia);
      for (std::size_t i = 0; i < n; ++i) {
        double d = g[i];
        if (kind == BinaryKind::mul) d *= bv2[b_scalar ? 0 : i];
        ga[a_scalar ? 0 : i] += d;
      }
    }
    if (tp.needs_grad(ib)) {
      auto gb = tp.grad_of(ib);
      for (std::size_t i = 0; i < n; ++i) {
        double d = g[i];
        if (kind == BinaryKind::sub) d = -d;
        if (kind == BinaryKind::mul) d *= av2[a_scalar ? 0 : i];
        gb[b_scalar ? 0 : i] += d;
      }
    }
  });
}

// Elementwise unary op whose derivative is expressible through input x and output y.
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const auto av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  const std::size_t ia = a.id();
  return a.tape().record(a.shape(), std::move(out), {a}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    const auto x = tp.value_of(ia);
    const auto y = tp.value_of(self);
    auto ga = tp.grad_of(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) { return binary(BinaryKind::add, "add", a, b); }
Var sub(Var a, Var b) { return binary(BinaryKind::sub, "sub", a, b); }
Var mul(Var a, Var b) { return binary(BinaryKind::mul, "mul", a, b); }

Var scale(Var a, double factor) {
  return unary(a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; });
}

Var one_minus(Var a) {
  return unary(a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  for (double x : a.value()) a.tape().note_branch(x > 0.0);
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var add_n(std::span<const Var> terms) {
  if (terms.empty()) throw ArgumentError("add_n: no operands");
  Tape& t = terms.front().tape();
  const Shape shape = terms.front().shape();
  std::vector<double> out(element_count(shape), 0.0);
  std::vector<std::size_t> ids;
  ids.reserve(terms.size());
  for (const Var& v : terms) {
    require_same_shape("add_n", terms.front(), v);
    const auto x = v.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += x[i];
    ids.push_back(v.id());
  }
  return t.record(shape, std::move(out), terms, [ids](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    for (std::size_t id : ids) {
      if (!tp.needs_grad(id)) continue;
      auto gi = tp.grad_of(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var transpose(Var a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const auto av = a.value();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  const std::size_t ia = a.id();
  return a.tape().record(Shape{n, m}, std::move(out), {a}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    auto ga = tp.grad_of(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
}

Var matmul(Var a, Var b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  const auto av = a.value();
  const auto bv = b.value();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += x * bv[p * n + j];
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(Shape{m, n}, std::move(out), {a, b}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    const auto av2 = tp.value_of(ia);
    const auto bv2 = tp.value_of(ib);
    if (tp.needs_grad(ia)) {
      auto ga = tp.grad_of(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv2[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (tp.needs_grad(ib)) {
      auto gb = tp.grad_of(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double x = av2[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += x * g[i * n + j];
        }
    }
  });
}

Var matvec(Var w, Var x) {
  require_rank("matvec", w, 2);
  require_rank("matvec", x, 1);
  const std::size_t m = w.shape()[0], k = w.shape()[1];
  if (x.shape()[0] != k) {
    throw DimensionError("matvec: " + shape_string(w.shape()) + " x " + shape_string(x.shape()));
  }
  const auto wv = w.value();
  const auto xv = x.value();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = wv.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) acc += row[j] * xv[j];
    out[i] = acc;
  }
  const std::size_t iw = w.id(), ix = x.id();
  return w.tape().record(Shape{m}, std::move(out), {w, x}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    if (tp.needs_grad(iw)) {
      const auto xv2 = tp.value_of(ix);
      auto gw = tp.grad_of(iw);
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        double* row = gw.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) row[j] += gi * xv2[j];
      }
    }
    if (tp.needs_grad(ix)) {
      const auto wv2 = tp.value_of(iw);
      auto gx = tp.grad_of(ix);
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        const double* row = wv2.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) gx[j] += row[j] * gi;
      }
    }
  });
}

Var matvec_t(Var w, Var x) {
  require_rank("matvec_t", w, 2);
  require_rank("matvec_t", x, 1);
  const std::size_t m = w.shape()[0], k = w.shape()[1];
  if (x.shape()[0] != m) {
    throw DimensionError("matvec_t: " + shape_string(w.shape()) + "^T x " + shape_string(x.shape()));
  }
  const auto wv = w.value();
  const auto xv = x.value();
  std::vector<double> out(k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = xv[i];
    const double* row = wv.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) out[j] += row[j] * xi;
  }
  const std::size_t iw = w.id(), ix = x.id();
  return w.tape().record(Shape{k}, std::move(out), {w, x}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    if (tp.needs_grad(iw)) {
      const auto xv2 = tp.value_of(ix);
      auto gw = tp.grad_of(iw);
      for (std::size_t i = 0; i < m; ++i) {
        double* row = gw.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) row[j] += xv2[i] * g[j];
      }
    }
    if (tp.needs_grad(ix)) {
      const auto wv2 = tp.value_of(iw);
      auto gx = tp.grad_of(ix);
      for (std::size_t i = 0; i < m; ++i) {
        const double* row = wv2.data() + i * k;
        double acc = 0.0;
        for (std::size_t j = 0; j < k; ++j) acc += row[j] * g[j];
        gx[i] += acc;
      }
    }
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat: no operands");
  std::vector<double> out;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // (id, offset)
  for (const Var& p : parts) {
    if (p.shape().size() > 1) require_rank("concat", p, 1);
    spans.emplace_back(p.id(), out.size());
    const auto v = p.value();
    out.insert(out.end(), v.begin(), v.end());
  }
  const std::size_t n = out.size();
  return parts.front().tape().record(Shape{n}, std::move(out), parts, [spans](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    for (const auto& [id, offset] : spans) {
      if (!tp.needs_grad(id)) continue;
      auto gi = tp.grad_of(id);
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[offset + i];
    }
  });
}

Var concat(Var a, Var b) {
  const Var parts[] = {a, b};
  return concat(std::span<const Var>(parts));
}

Var slice(Var v, std::size_t offset, std::size_t length) {
  require_rank("slice", v, 1);
  if (offset + length > v.size()) {
    throw DimensionError("slice [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                         ") out of range for " + shape_string(v.shape()));
  }
  const auto x = v.value();
  std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(offset),
                          x.begin() + static_cast<std::ptrdiff_t>(offset + length));
  const std::size_t iv = v.id();
  return v.tape().record(Shape{length}, std::move(out), {v}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    auto gv = tp.grad_of(iv);
    for (std::size_t i = 0; i < length; ++i) gv[offset + i] += g[i];
  });
}

Var row(Var matrix, std::size_t r) {
  require_rank("row", matrix, 2);
  const std::size_t rows = matrix.shape()[0], cols = matrix.shape()[1];
  if (r >= rows) {
    throw DimensionError("row " + std::to_string(r) + " out of range for " + shape_string(matrix.shape()));
  }
  const auto x = matrix.value();
  std::vector<double> out(x.begin() + static_cast<std::ptrdiff_t>(r * cols),
                          x.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
  const std::size_t im = matrix.id();
  return matrix.tape().record(Shape{cols}, std::move(out), {matrix}, [=](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    auto gm = tp.grad_of(im);
    for (std::size_t j = 0; j < cols; ++j) gm[r * cols + j] += g[j];
  });
}

Var stack(std::span<const Var> rows) {
  if (rows.empty()) throw ArgumentError("stack: no rows");
  const std::size_t cols = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * cols);
  std::vector<std::size_t> ids;
  for (const Var& r : rows) {
    require_rank("stack", r, 1);
    require_same_shape("stack", rows.front(), r);
    const auto v = r.value();
    out.insert(out.end(), v.begin(), v.end());
    ids.push_back(r.id());
  }
  return rows.front().tape().record(Shape{rows.size(), cols}, std::move(out), rows,
                                    [ids, cols](Tape& tp, std::size_t self) {
                                      const auto g = tp.grad_of(self);
                                      for (std::size_t r = 0; r < ids.size(); ++r) {
                                        if (!tp.needs_grad(ids[r])) continue;
                                        auto gr = tp.grad_of(ids[r]);
                                        for (std::size_t j = 0; j < cols; ++j) gr[j] += g[r * cols + j];
                                      }
                                    });
}

Var sum(Var a) {
  const auto x = a.value();
  double acc = 0.0;
  for (double v : x) acc += v;
  const std::size_t ia = a.id();
  return a.tape().record(Shape{}, {acc}, {a}, [ia](Tape& tp, std::size_t self) {
    const double g = tp.grad_of(self)[0];
    for (double& d : tp.grad_of(ia)) d += g;
  });
}

Var dot(Var a, Var b) {
  require_same_shape("dot", a, b);
  const auto x = a.value();
  const auto y = b.value();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(Shape{}, {acc}, {a, b}, [ia, ib](Tape& tp, std::size_t self) {
    const double g = tp.grad_of(self)[0];
    const auto x2 = tp.value_of(ia);
    const auto y2 = tp.value_of(ib);
    if (tp.needs_grad(ia)) {
      auto ga = tp.grad_of(ia);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * y2[i];
    }
    if (tp.needs_grad(ib)) {
      auto gb = tp.grad_of(ib);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * x2[i];
    }
  });
}

Var additive_scores(Var keys, Var query, Var v) {
  require_rank("additive_scores", keys, 2);
  require_rank("additive_scores", query, 1);
  require_same_shape("additive_scores", query, v);
  const std::size_t rows = keys.shape()[0], cols = keys.shape()[1];
  if (cols != query.size()) {
    throw DimensionError("additive_scores: keys " + shape_string(keys.shape()) + " vs query " +
                         shape_string(query.shape()));
  }
  const auto k = keys.value();
  const auto q = query.value();
  const auto w = v.value();
  std::vector<double> hidden(rows * cols);
  std::vector<double> out(rows, 0.0);
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t i = 0; i < cols; ++i) {
      const double t = std::tanh(k[m * cols + i] + q[i]);
      hidden[m * cols + i] = t;
      out[m] += w[i] * t;
    }
  }
  const std::size_t ik = keys.id(), iq = query.id(), iv = v.id();
  return keys.tape().record(
      Shape{rows}, std::move(out), {keys, query, v},
      [=, hidden = std::move(hidden)](Tape& tp, std::size_t self) {
        const auto g = tp.grad_of(self);
        const auto w2 = tp.value_of(iv);
        const bool nk = tp.needs_grad(ik), nq = tp.needs_grad(iq), nv = tp.needs_grad(iv);
        std::span<double> gk, gq, gv;
        if (nk) gk = tp.grad_of(ik);
        if (nq) gq = tp.grad_of(iq);
        if (nv) gv = tp.grad_of(iv);
        for (std::size_t m = 0; m < rows; ++m) {
          for (std::size_t i = 0; i < cols; ++i) {
            const double t = hidden[m * cols + i];
            const double d = g[m] * w2[i] * (1.0 - t * t);
            if (nk) gk[m * cols + i] += d;
            if (nq) gq[i] += d;
            if (nv) gv[i] += g[m] * t;
          }
        }
      });
}

Var masked_softmax(Var x, double scale, const std::vector<bool>& visible) {
  require_rank("softmax", x, 1);
  const std::size_t n = x.size();
  if (n == 0) throw ArgumentError("softmax: empty input");
  if (!(scale > 0.0)) throw ArgumentError("softmax: scale must be positive");
  if (!visible.empty() && visible.size() != n) {
    throw DimensionError("softmax: mask length " + std::to_string(visible.size()) + " for input of length " +
                         std::to_string(n));
  }
  auto shown = [&](std::size_t i) { return visible.empty() || visible[i]; };
  const auto v = x.value();
  double max_v = -std::numeric_limits<double>::infinity();
  bool any_shown = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!shown(i)) continue;
    any_shown = true;
    if (!std::isfinite(v[i])) throw NumericError("softmax: non-finite input at position " + std::to_string(i));
    max_v = std::max(max_v, scale * v[i]);
  }
  if (!any_shown) throw ArgumentError("softmax: every position is masked");
  std::vector<double> out(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!shown(i)) continue;
    out[i] = std::exp(scale * v[i] - max_v);
    total += out[i];
  }
  for (double& o : out) o /= total;
  const std::size_t ix = x.id();
  return x.tape().record(Shape{n}, std::move(out), {x}, [ix, n, scale](Tape& tp, std::size_t self) {
    const auto g = tp.grad_of(self);
    const auto y = tp.value_of(self);
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) inner += g[i] * y[i];
    auto gx = tp.grad_of(ix);
    for (std::size_t i = 0; i < n; ++i) gx[i] += scale * y[i] * (g[i] - inner);
  });
}

Var softmax(Var x, double scale) { return masked_softmax(x, scale, {}); }

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  require_rank("layer_norm", x, 1);
  require_same_shape("layer_norm", x, gain);
  require_same_shape("layer_norm", x, bias);
  const std::size_t n = x.size();
  const auto v = x.value();
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double e : v) var += (e - mean) * (e - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / std::sqrt(var + eps);
  std::vector<double> normed(n);
  for (std::size_t i = 0; i < n; ++i) normed[i] = (v[i] - mean) * inv_std;
  const auto gv = gain.value();
  const auto bv = bias.value();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = gv[i] * normed[i] + bv[i];
  const std::size_t ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape().record(
      Shape{n}, std::move(out), {x, gain, bias}, [=, normed = std::move(normed)](Tape& tp, std::size_t self) {
        const auto g = tp.grad_of(self);
        const auto gain_v = tp.value_of(ig);
        if (tp.needs_grad(ig)) {
          auto gg = tp.grad_of(ig);
          for (std::size_t i = 0; i < n; ++i) gg[i] += g[i] * normed[i];
        }
        if (tp.needs_grad(ib)) {
          auto gb = tp.grad_of(ib);
          for (std::size_t i = 0; i < n; ++i) gb[i] += g[i];
        }
        if (tp.needs_grad(ix)) {
          // dx = inv_std * (dn - mean(dn) - n_hat * mean(dn * n_hat)), dn = g * gain
          double mean_dn = 0.0, mean_dn_n = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double dn = g[i] * gain_v[i];
            mean_dn += dn;
            mean_dn_n += dn * normed[i];
          }
          mean_dn /= static_cast<double>(n);
          mean_dn_n /= static_cast<double>(n);
          auto gx = tp.grad_of(ix);
          for (std::size_t i = 0; i < n; ++i) {
            const double dn = g[i] * gain_v[i];
            gx[i] += inv_std * (dn - mean_dn - normed[i] * mean_dn_n);
          }
        }
      });
}

Var cross_entropy(Var logits, std::size_t target) {
  require_rank("cross_entropy", logits, 1);
  const std::size_t n = logits.size();
  if (target >= n) {
    throw DimensionError("cross_entropy: target " + std::to_string(target) + " outside " + std::to_string(n) +
                         " classes");
  }
  const auto v = logits.value();
  const double max_v = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double e : v) total += std::exp(e - max_v);
  const double log_z = max_v + std::log(total);
  const std::size_t il = logits.id();
  return logits.tape().record(Shape{}, {log_z - v[target]}, {logits}, [=](Tape& tp, std::size_t self) {
    const double g = tp.grad_of(self)[0];
    const auto lv = tp.value_of(il);
    auto gl = tp.grad_of(il);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::exp(lv[i] - log_z);
      gl[i] += g * (p - (i == target ? 1.0 : 0.0));
    }
  });
}

}  // namespace rgse::ad
