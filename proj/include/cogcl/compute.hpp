// Copyright 2026 The cogcl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Numerical substrate: named parameters with optimizer state, a reverse-mode
// tape, and the handful of kernels the model is built from. Every kernel has a
// hand-written backward rule; grad_check verifies them against central finite
// differences.

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogcl/common.hpp"
#include "cogcl/graph.hpp"

namespace cogcl::compute {

inline constexpr double kNormFloor = 1e-12;

template <typename T>
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Mat<T> value;
    Mat<T> grad;
    Mat<T> adam_m;
    Mat<T> adam_v;
    std::int64_t step = 0;
  };

  /// Adds an entry; grad and moment buffers are zero-initialized. Throws on a
  /// duplicate name.
  Entry& add(const std::string& name, Mat<T> value);
  Entry& at(const std::string& name);
  const Entry& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::deque<Entry>& entries() { return entries_; }
  const std::deque<Entry>& entries() const { return entries_; }

  void zero_grad();

  template <typename U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (const auto& e : entries_) {
      auto& o = out.add(e.name, e.value.template cast<U>());
      o.grad = e.grad.template cast<U>();
      o.adam_m = e.adam_m.template cast<U>();
      o.adam_v = e.adam_v.template cast<U>();
      o.step = e.step;
    }
    return out;
  }

 private:
  std::deque<Entry> entries_;
};

/// Handle to a tape node.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

/// Reverse-mode tape. Kernels append nodes in execution order; backward()
/// replays their gradient rules in exact reverse order and then flushes leaf
/// gradients into the bound ParameterStore entries. One tape per batch.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, Var self)>;

  Var constant(Mat<T> value);
  /// Leaf bound to a store entry; its gradient is added to entry.grad on backward.
  Var parameter(typename ParameterStore<T>::Entry& entry);
  Var parameter(ParameterStore<T>& store, const std::string& name) { return parameter(store.at(name)); }

  Var record(std::string_view kernel, Mat<T> value, std::vector<Var> inputs, BackwardFn backward);

  const Mat<T>& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }
  T scalar(Var v) const;
  std::string_view kernel(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).kernel; }
  bool requires_grad(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).requires_grad; }
  /// Gradient buffer of a node, allocated as zeros on first access.
  Mat<T>& grad(Var v);

  void backward(Var loss);
  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::string_view kernel;
    Mat<T> value;
    Mat<T> grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::vector<Var> inputs;
    BackwardFn backward;
    Mat<T>* sink = nullptr;
  };
  std::vector<Node> nodes_;
};

// ---- kernels -------------------------------------------------------------

/// Y = A X with A the normalized adjacency. Backward uses A^T = A.
template <typename T>
Mat<T> spmm_value(const graph::CsrGraph& g, const Mat<T>& x);
template <typename T>
Var spmm(Tape<T>& tape, const graph::CsrGraph& g, Var x);

/// Inverted dropout. Eval mode or rate 0 is the identity.
template <typename T>
Var dropout(Tape<T>& tape, Var x, double rate, Rng& rng, bool train_mode);

/// Identity forward, zero backward.
template <typename T>
Var stop_gradient(Tape<T>& tape, Var x);

/// sum_k coeff_k * x_k over same-shaped inputs.
template <typename T>
Var linear_combination(Tape<T>& tape, const std::vector<std::pair<Var, double>>& terms);
template <typename T>
Var sub(Tape<T>& tape, Var a, Var b);

template <typename T>
Var vstack(Tape<T>& tape, Var top, Var bottom);
template <typename T>
Var gather_rows(Tape<T>& tape, Var x, std::span<const std::int32_t> rows);
template <typename T>
Var slice_cols(Tape<T>& tape, Var x, std::int64_t begin, std::int64_t count);

/// S[i,j] = cos(A_i, B_j), norms floored at kNormFloor.
template <typename T>
Mat<T> cosine_sim_value(const Mat<T>& a, const Mat<T>& b);
template <typename T>
Var cosine_sim(Tape<T>& tape, Var a, Var b);

/// Rows whose norm fell below kNormFloor in any cosine kernel since start.
std::int64_t zero_norm_rows();

enum class GradStop { none, no_alignment, no_uniformity };

const char* to_string(GradStop s);

/// mean_r [ -log softmax(S_r / tau)[target_r] ]. no_alignment detaches every
/// target entry S_r[target_r]; no_uniformity detaches every other entry. The
/// returned value is the same in all three modes.
template <typename T>
Var softmax_cross_entropy(Tape<T>& tape, Var sims, std::span<const std::int32_t> targets, double tau,
                          GradStop stop = GradStop::none);

/// mean_b -log sigmoid(<u_b, p_b> - <u_b, n_b>) over row-aligned inputs.
template <typename T>
Var bpr(Tape<T>& tape, Var users, Var pos, Var neg);

// ---- optimizer and verification -------------------------------------------

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled decay: value *= (1 - lr * weight_decay) before the Adam update.
  double weight_decay = 1e-6;
};

/// Bias-corrected Adam over every entry, then zeroes the gradients. Throws
/// NumericError naming the entry if any gradient is non-finite.
template <typename T>
void adam_step(ParameterStore<T>& store, const AdamOptions& opt);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int probes = 0;
};

/// `loss_fn(store, with_grad)` evaluates the loss and, when with_grad is set,
/// also accumulates analytic gradients into the store. Central differences on
/// `num_probes` random coordinates of `entry`; relative error is
/// |g_a - g_fd| / max(|g_a|, |g_fd|, 1e-8).
GradCheckResult grad_check(ParameterStore<double>& store,
                           const std::function<double(ParameterStore<double>&, bool)>& loss_fn,
                           const std::string& entry, int num_probes, std::uint64_t seed, double h = 1e-4);

}  // namespace cogcl::compute
