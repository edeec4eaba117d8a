// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "rgse/param_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "rgse/errors.hpp"
#include "rgse/rng.hpp"

namespace rgse {

Tensor& ParamStore::add(const std::string& name, Shape shape, Init init) {
  Tensor t(std::move(shape));
  if (init == Init::ones) {
    for (double& v : t.data()) v = 1.0;
  } else if (init == Init::uniform_fan_in) {
    const std::size_t fan_in = t.rank() == 0 ? 1 : t.shape().back();
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Rng rng(derive_seed(seed_, name));
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
  }
  t.enable_grad();
  return insert(name, std::move(t));
}

Tensor& ParamStore::insert(const std::string& name, Tensor value) {
  if (locked_) throw StateError("parameter '" + name + "' registered after the store was locked");
  auto [it, inserted] = params_.emplace(name, std::move(value));
  if (!inserted) throw ArgumentError("duplicate parameter name '" + name + "'");
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ArgumentError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ArgumentError("unknown parameter '" + name + "'");
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, t] : params_) t.zero_grad();
}

double ParamStore::grad_norm() const {
  double total = 0.0;
  for (const auto& [_, t] : params_) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) total += g * g;
  }
  return std::sqrt(total);
}

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return r;
  }
  return v;
}

}  // namespace

void write_tensors(std::ostream& out, const ParamStore& store) {
  for (const auto& [name, t] : store.entries()) {
    out << "tensor " << name << " " << t.rank();
    for (std::size_t d : t.shape()) out << " " << d;
    out << "\n";
    for (double v : t.data()) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    out << "\n";
  }
  out << "end\n";
}

std::map<std::string, Tensor> read_tensors(std::istream& in) {
  std::map<std::string, Tensor> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "end") return out;
    std::istringstream header(line);
    std::string tag, name;
    std::size_t rank = 0;
    if (!(header >> tag >> name >> rank) || tag != "tensor") {
      throw ParseError("bad tensor header '" + line + "'", line_no);
    }
    Shape shape(rank);
    for (std::size_t& d : shape) {
      if (!(header >> d)) throw ParseError("bad shape in '" + line + "'", line_no);
    }
    std::vector<double> values(element_count(shape));
    for (double& v : values) {
      std::uint64_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw ParseError("truncated data for tensor '" + name + "'", line_no);
      }
      v = std::bit_cast<double>(to_little_endian(bits));
    }
    if (in.get() != '\n') throw ParseError("missing terminator after tensor '" + name + "'", line_no);
    out.emplace(name, Tensor(std::move(shape), std::move(values)));
  }
  throw ParseError("checkpoint ended without 'end' marker", line_no);
}

}  // namespace rgse
