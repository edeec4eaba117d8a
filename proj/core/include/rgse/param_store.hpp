// Copyright 2026 The RGSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rgse/tensor.hpp"

namespace rgse {

enum class Init {
  zeros,
  ones,
  /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], fan_in = trailing extent.
  uniform_fan_in,
};

/// Named trainable tensors.
///
/// Names are hierarchical ("enc.fwd.z.W_state"); iteration is sorted by name.
/// Each tensor is initialized from a stream derived from (seed, name), so a
/// parameter's initial value does not depend on which other parameters exist.
/// Tensor addresses are stable for the lifetime of the store.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  Tensor& add(const std::string& name, Shape shape, Init init);
  /// Registers an existing tensor as-is (gradient slot included).
  Tensor& insert(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::map<std::string, Tensor>& entries() { return params_; }
  const std::map<std::string, Tensor>& entries() const { return params_; }
  std::vector<std::string> names() const;

  std::uint64_t seed() const { return seed_; }
  std::size_t scalar_count() const;

  /// After lock(), add()/insert() raise StateError.
  void lock() { locked_ = true; }
  bool locked() const { return locked_; }

  void zero_grad();
  double grad_norm() const;

 private:
  std::uint64_t seed_;
  std::map<std::string, Tensor> params_;
  bool locked_ = false;
};

/// Writes every tensor as a text header line "tensor <name> <shape>" followed by
/// its values as little-endian 64-bit floats, in name order.
void write_tensors(std::ostream& out, const ParamStore& store);
/// Reads tensors written by write_tensors until an "end" line.
std::map<std::string, Tensor> read_tensors(std::istream& in);

}  // namespace rgse
