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

#include "cogcl/compute.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

namespace cogcl::compute {
namespace {

std::atomic<std::int64_t> g_zero_norm_rows{0};

std::string shape_of(const auto& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

template <typename T>
void require_same_shape(const Mat<T>& a, const Mat<T>& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
}

// Row norms floored at kNormFloor; `floored` marks rows that hit the floor.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, 1> floored_norms(const Mat<T>& m, std::vector<char>& floored) {
  Eigen::Matrix<T, Eigen::Dynamic, 1> n = m.rowwise().norm();
  floored.assign(static_cast<std::size_t>(m.rows()), 0);
  for (Eigen::Index r = 0; r < n.size(); ++r) {
    if (n(r) < static_cast<T>(kNormFloor)) {
      n(r) = static_cast<T>(kNormFloor);
      floored[static_cast<std::size_t>(r)] = 1;
      g_zero_norm_rows.fetch_add(1, std::memory_order_relaxed);
    }
  }
  return n;
}

// Backward of row normalization: unit rows project out the radial component.
template <typename T>
void normalize_backward(const Mat<T>& d_hat, const Mat<T>& hat, const Eigen::Matrix<T, Eigen::Dynamic, 1>& norms,
                        const std::vector<char>& floored, Mat<T>& d_in) {
  for (Eigen::Index r = 0; r < hat.rows(); ++r) {
    if (floored[static_cast<std::size_t>(r)]) {
      d_in.row(r) += d_hat.row(r) / norms(r);
    } else {
      const T radial = d_hat.row(r).dot(hat.row(r));
      d_in.row(r) += (d_hat.row(r) - radial * hat.row(r)) / norms(r);
    }
  }
}

}  // namespace

// ---- ParameterStore --------------------------------------------------------

template <typename T>
typename ParameterStore<T>::Entry& ParameterStore<T>::add(const std::string& name, Mat<T> value) {
  if (contains(name)) throw Error("duplicate parameter '" + name + "'");
  Entry e;
  e.name = name;
  e.grad = Mat<T>::Zero(value.rows(), value.cols());
  e.adam_m = Mat<T>::Zero(value.rows(), value.cols());
  e.adam_v = Mat<T>::Zero(value.rows(), value.cols());
  e.value = std::move(value);
  entries_.push_back(std::move(e));
  return entries_.back();
}

template <typename T>
typename ParameterStore<T>::Entry& ParameterStore<T>::at(const std::string& name) {
  for (auto& e : entries_)
    if (e.name == name) return e;
  throw Error("no parameter named '" + name + "'");
}

template <typename T>
const typename ParameterStore<T>::Entry& ParameterStore<T>::at(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  throw Error("no parameter named '" + name + "'");
}

template <typename T>
bool ParameterStore<T>::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& e : entries_) e.grad.setZero();
}

// ---- Tape ------------------------------------------------------------------

template <typename T>
Var Tape<T>::constant(Mat<T> value) {
  Node n;
  n.kernel = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::parameter(typename ParameterStore<T>::Entry& entry) {
  Node n;
  n.kernel = "parameter";
  n.value = entry.value;
  n.requires_grad = true;
  n.sink = &entry.grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::record(std::string_view kernel, Mat<T> value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.kernel = kernel;
  n.value = std::move(value);
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(), [this](Var v) { return requires_grad(v); });
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
T Tape<T>::scalar(Var v) const {
  const auto& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw ShapeError("expected a scalar, got " + shape_of(m));
  return m(0, 0);
}

template <typename T>
Mat<T>& Tape<T>::grad(Var v) {
  Node& n = nodes_.at(static_cast<std::size_t>(v.id));
  if (!n.has_grad) {
    n.grad = Mat<T>::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

template <typename T>
void Tape<T>::backward(Var loss) {
  (void)scalar(loss);
  if (!requires_grad(loss)) return;
  grad(loss)(0, 0) += T(1);
  for (std::int32_t k = loss.id; k >= 0; --k) {
    Node& n = nodes_[static_cast<std::size_t>(k)];
    if (!n.has_grad || !n.requires_grad) continue;
    if (n.backward) n.backward(*this, Var{k});
    if (n.sink) *n.sink += n.grad;
  }
}

// ---- kernels -----------------------------------------------------------------

template <typename T>
Mat<T> spmm_value(const graph::CsrGraph& g, const Mat<T>& x) {
  if (x.rows() != g.num_nodes())
    throw ShapeError("spmm: input has " + std::to_string(x.rows()) + " rows, graph has " +
                     std::to_string(g.num_nodes()) + " nodes");
  const Eigen::Index d = x.cols();
  Mat<T> y = Mat<T>::Zero(x.rows(), d);
  const auto& rp = g.row_ptr();
  const auto& cols = g.cols();
  const auto& w = g.weights();
  parallel_for(g.num_nodes(), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t v = begin; v < end; ++v) {
      T* out = y.data() + v * d;
      for (std::int64_t k = rp[v]; k < rp[v + 1]; ++k) {
        const T wk = static_cast<T>(w[static_cast<std::size_t>(k)]);
        const T* in = x.data() + std::int64_t{cols[static_cast<std::size_t>(k)]} * d;
        for (Eigen::Index c = 0; c < d; ++c) out[c] += wk * in[c];
      }
    }
  }, 256);
  return y;
}

template <typename T>
Var spmm(Tape<T>& tape, const graph::CsrGraph& g, Var x) {
  return tape.record("spmm", spmm_value(g, tape.value(x)), {x}, [&g, x](Tape<T>& t, Var self) {
    if (t.requires_grad(x)) t.grad(x) += spmm_value(g, t.grad(self));
  });
}

template <typename T>
Var dropout(Tape<T>& tape, Var x, double rate, Rng& rng, bool train_mode) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout rate must lie in [0, 1)");
  if (!train_mode || rate == 0.0) {
    return tape.record("dropout", tape.value(x), {x}, [x](Tape<T>& t, Var self) {
      if (t.requires_grad(x)) t.grad(x) += t.grad(self);
    });
  }
  const Mat<T>& in = tape.value(x);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  Mat<T> mask(in.rows(), in.cols());
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = u01(rng) < rate ? T(0) : keep_scale;
  Mat<T> out = in.cwiseProduct(mask);
  return tape.record("dropout", std::move(out), {x}, [x, mask = std::move(mask)](Tape<T>& t, Var self) {
    if (t.requires_grad(x)) t.grad(x) += t.grad(self).cwiseProduct(mask);
  });
}

template <typename T>
Var stop_gradient(Tape<T>& tape, Var x) {
  return tape.record("stop_gradient", tape.value(x), {x}, [](Tape<T>&, Var) {});
}

template <typename T>
Var linear_combination(Tape<T>& tape, const std::vector<std::pair<Var, double>>& terms) {
  if (terms.empty()) throw ShapeError("linear_combination: no terms");
  Mat<T> out = Mat<T>::Zero(tape.value(terms[0].first).rows(), tape.value(terms[0].first).cols());
  std::vector<Var> inputs;
  for (const auto& [v, c] : terms) {
    require_same_shape(out, tape.value(v), "linear_combination");
    out += static_cast<T>(c) * tape.value(v);
    inputs.push_back(v);
  }
  return tape.record("linear_combination", std::move(out), std::move(inputs), [terms](Tape<T>& t, Var self) {
    for (const auto& [v, c] : terms)
      if (t.requires_grad(v)) t.grad(v) += static_cast<T>(c) * t.grad(self);
  });
}

template <typename T>
Var sub(Tape<T>& tape, Var a, Var b) {
  return linear_combination<T>(tape, {{a, 1.0}, {b, -1.0}});
}

template <typename T>
Var vstack(Tape<T>& tape, Var top, Var bottom) {
  const Mat<T>& a = tape.value(top);
  const Mat<T>& b = tape.value(bottom);
  if (a.cols() != b.cols()) throw ShapeError("vstack: column mismatch " + shape_of(a) + " vs " + shape_of(b));
  Mat<T> out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  const Eigen::Index na = a.rows();
  const Eigen::Index nb = b.rows();
  return tape.record("vstack", std::move(out), {top, bottom}, [top, bottom, na, nb](Tape<T>& t, Var self) {
    const Mat<T>& g = t.grad(self);
    if (t.requires_grad(top)) t.grad(top) += g.topRows(na);
    if (t.requires_grad(bottom)) t.grad(bottom) += g.bottomRows(nb);
  });
}

template <typename T>
Var gather_rows(Tape<T>& tape, Var x, std::span<const std::int32_t> rows) {
  const Mat<T>& in = tape.value(x);
  Mat<T> out(static_cast<Eigen::Index>(rows.size()), in.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= in.rows()) throw ShapeError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(r)) = in.row(rows[r]);
  }
  std::vector<std::int32_t> idx(rows.begin(), rows.end());
  return tape.record("gather_rows", std::move(out), {x}, [x, idx = std::move(idx)](Tape<T>& t, Var self) {
    if (!t.requires_grad(x)) return;
    const Mat<T>& g = t.grad(self);
    Mat<T>& gx = t.grad(x);
    for (std::size_t r = 0; r < idx.size(); ++r) gx.row(idx[r]) += g.row(static_cast<Eigen::Index>(r));
  });
}

template <typename T>
Var slice_cols(Tape<T>& tape, Var x, std::int64_t begin, std::int64_t count) {
  const Mat<T>& in = tape.value(x);
  if (begin < 0 || count < 0 || begin + count > in.cols()) throw ShapeError("slice_cols: range out of bounds");
  Mat<T> out = in.middleCols(begin, count);
  return tape.record("slice_cols", std::move(out), {x}, [x, begin, count](Tape<T>& t, Var self) {
    if (t.requires_grad(x)) t.grad(x).middleCols(begin, count) += t.grad(self);
  });
}

template <typename T>
Mat<T> cosine_sim_value(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols() != b.cols()) throw ShapeError("cosine_sim: dimension mismatch " + shape_of(a) + " vs " + shape_of(b));
  std::vector<char> fa, fb;
  auto na = floored_norms(a, fa);
  auto nb = floored_norms(b, fb);
  Mat<T> ah = na.cwiseInverse().asDiagonal() * a;
  Mat<T> bh = nb.cwiseInverse().asDiagonal() * b;
  return ah * bh.transpose();
}

template <typename T>
Var cosine_sim(Tape<T>& tape, Var a, Var b) {
  const Mat<T>& av = tape.value(a);
  const Mat<T>& bv = tape.value(b);
  if (av.cols() != bv.cols()) throw ShapeError("cosine_sim: dimension mismatch " + shape_of(av) + " vs " + shape_of(bv));
  std::vector<char> fa, fb;
  auto na = floored_norms(av, fa);
  auto nb = floored_norms(bv, fb);
  Mat<T> ah = na.cwiseInverse().asDiagonal() * av;
  Mat<T> bh = nb.cwiseInverse().asDiagonal() * bv;
  Mat<T> s = ah * bh.transpose();
  return tape.record("cosine_sim", std::move(s), {a, b},
                     [a, b, ah = std::move(ah), bh = std::move(bh), na = std::move(na), nb = std::move(nb),
                      fa = std::move(fa), fb = std::move(fb)](Tape<T>& t, Var self) {
                       const Mat<T>& g = t.grad(self);
                       if (t.requires_grad(a)) {
                         Mat<T> d_ah = g * bh;
                         normalize_backward(d_ah, ah, na, fa, t.grad(a));
                       }
                       if (t.requires_grad(b)) {
                         Mat<T> d_bh = g.transpose() * ah;
                         normalize_backward(d_bh, bh, nb, fb, t.grad(b));
                       }
                     });
}

std::int64_t zero_norm_rows() { return g_zero_norm_rows.load(); }

const char* to_string(GradStop s) {
  switch (s) {
    case GradStop::none: return "none";
    case GradStop::no_alignment: return "no_alignment";
    case GradStop::no_uniformity: return "no_uniformity";
  }
  return "?";
}

template <typename T>
Var softmax_cross_entropy(Tape<T>& tape, Var sims, std::span<const std::int32_t> targets, double tau, GradStop stop) {
  if (tau <= 0.0) throw UsageError("temperature must be positive");
  const Mat<T>& s = tape.value(sims);
  if (static_cast<std::size_t>(s.rows()) != targets.size())
    throw ShapeError("softmax_cross_entropy: " + std::to_string(targets.size()) + " targets for " + shape_of(s));
  const Eigen::Index n = s.rows();
  const Eigen::Index m = s.cols();
  Mat<T> probs(n, m);
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::int32_t t = targets[static_cast<std::size_t>(r)];
    if (t < 0 || t >= m) throw ShapeError("softmax_cross_entropy: target out of range");
    const T mx = s.row(r).maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double e = std::exp((static_cast<double>(s(r, j)) - static_cast<double>(mx)) / tau);
      probs(r, j) = static_cast<T>(e);
      z += e;
    }
    probs.row(r) /= static_cast<T>(z);
    total += std::log(z) - (static_cast<double>(s(r, t)) - static_cast<double>(mx)) / tau;
  }
  Mat<T> out(1, 1);
  out(0, 0) = static_cast<T>(n > 0 ? total / static_cast<double>(n) : 0.0);
  std::vector<std::int32_t> tg(targets.begin(), targets.end());
  return tape.record("softmax_cross_entropy", std::move(out), {sims},
                     [sims, tg = std::move(tg), probs = std::move(probs), tau, stop](Tape<T>& t, Var self) {
                       if (!t.requires_grad(sims)) return;
                       const Eigen::Index rows = probs.rows();
                       if (rows == 0) return;
                       const T coef = t.grad(self)(0, 0) / static_cast<T>(static_cast<double>(rows) * tau);
                       Mat<T>& gs = t.grad(sims);
                       for (Eigen::Index r = 0; r < rows; ++r) {
                         const std::int32_t target = tg[static_cast<std::size_t>(r)];
                         for (Eigen::Index j = 0; j < probs.cols(); ++j) {
                           const bool is_target = j == target;
                           if (is_target && stop == GradStop::no_alignment) continue;
                           if (!is_target && stop == GradStop::no_uniformity) continue;
                           gs(r, j) += coef * (probs(r, j) - (is_target ? T(1) : T(0)));
                         }
                       }
                     });
}

template <typename T>
Var bpr(Tape<T>& tape, Var users, Var pos, Var neg) {
  const Mat<T>& u = tape.value(users);
  const Mat<T>& p = tape.value(pos);
  const Mat<T>& q = tape.value(neg);
  require_same_shape(u, p, "bpr");
  require_same_shape(u, q, "bpr");
  const Eigen::Index n = u.rows();
  Eigen::Matrix<T, Eigen::Dynamic, 1> slope(n);
  double total = 0.0;
  for (Eigen::Index b = 0; b < n; ++b) {
    const double x = static_cast<double>(u.row(b).dot(p.row(b))) - static_cast<double>(u.row(b).dot(q.row(b)));
    // -log sigmoid(x) = softplus(-x)
    total += std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    slope(b) = static_cast<T>(-1.0 / (1.0 + std::exp(x)));  // d/dx
  }
  Mat<T> out(1, 1);
  out(0, 0) = static_cast<T>(n > 0 ? total / static_cast<double>(n) : 0.0);
  return tape.record("bpr", std::move(out), {users, pos, neg},
                     [users, pos, neg, slope = std::move(slope)](Tape<T>& t, Var self) {
                       const Eigen::Index rows = slope.size();
                       if (rows == 0) return;
                       const Eigen::Matrix<T, Eigen::Dynamic, 1> c = slope * (t.grad(self)(0, 0) / static_cast<T>(rows));
                       const Mat<T>& u = t.value(users);
                       const Mat<T>& p = t.value(pos);
                       const Mat<T>& q = t.value(neg);
                       if (t.requires_grad(users)) t.grad(users) += c.asDiagonal() * (p - q);
                       if (t.requires_grad(pos)) t.grad(pos) += c.asDiagonal() * u;
                       if (t.requires_grad(neg)) t.grad(neg) -= c.asDiagonal() * u;
                     });
}

template <typename T>
void adam_step(ParameterStore<T>& store, const AdamOptions& opt) {
  for (auto& e : store.entries()) {
    if (!e.grad.allFinite()) throw NumericError("non-finite gradient in parameter '" + e.name + "'");
  }
  for (auto& e : store.entries()) {
    ++e.step;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(e.step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(e.step));
    if (opt.weight_decay > 0.0) e.value *= static_cast<T>(1.0 - opt.lr * opt.weight_decay);
    e.adam_m = static_cast<T>(opt.beta1) * e.adam_m + static_cast<T>(1.0 - opt.beta1) * e.grad;
    e.adam_v = static_cast<T>(opt.beta2) * e.adam_v + static_cast<T>(1.0 - opt.beta2) * e.grad.cwiseAbs2();
    const T step_size = static_cast<T>(opt.lr / bc1);
    const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
    const T eps = static_cast<T>(opt.eps);
    e.value.array() -= step_size * e.adam_m.array() / ((e.adam_v.array().sqrt() * inv_sqrt_bc2) + eps);
    e.grad.setZero();
  }
}

GradCheckResult grad_check(ParameterStore<double>& store,
                           const std::function<double(ParameterStore<double>&, bool)>& loss_fn,
                           const std::string& entry, int num_probes, std::uint64_t seed, double h) {
  store.zero_grad();
  loss_fn(store, true);
  auto& e = store.at(entry);
  const Mat<double> analytic = e.grad;
  store.zero_grad();

  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, e.value.size() - 1);
  GradCheckResult res;
  for (int p = 0; p < num_probes; ++p) {
    const Eigen::Index k = pick(rng);
    double& x = e.value.data()[k];
    const double saved = x;
    x = saved + h;
    const double f_plus = loss_fn(store, false);
    x = saved - h;
    const double f_minus = loss_fn(store, false);
    x = saved;
    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double ga = analytic.data()[k];
    const double rel = std::abs(ga - fd) / std::max({std::abs(ga), std::abs(fd), 1e-8});
    res.max_rel_error = std::max(res.max_rel_error, rel);
    ++res.probes;
  }
  return res;
}

#define COGCL_INSTANTIATE(T)                                                                                     \
  template class ParameterStore<T>;                                                                              \
  template class Tape<T>;                                                                                        \
  template Mat<T> spmm_value<T>(const graph::CsrGraph&, const Mat<T>&);                                         \
  template Var spmm<T>(Tape<T>&, const graph::CsrGraph&, Var);                                                  \
  template Var dropout<T>(Tape<T>&, Var, double, Rng&, bool);                                                   \
  template Var stop_gradient<T>(Tape<T>&, Var);                                                                 \
  template Var linear_combination<T>(Tape<T>&, const std::vector<std::pair<Var, double>>&);                    \
  template Var sub<T>(Tape<T>&, Var, Var);                                                                      \
  template Var vstack<T>(Tape<T>&, Var, Var);                                                                   \
  template Var gather_rows<T>(Tape<T>&, Var, std::span<const std::int32_t>);                                    \
  template Var slice_cols<T>(Tape<T>&, Var, std::int64_t, std::int64_t);                                        \
  template Mat<T> cosine_sim_value<T>(const Mat<T>&, const Mat<T>&);                                            \
  template Var cosine_sim<T>(Tape<T>&, Var, Var);                                                               \
  template Var softmax_cross_entropy<T>(Tape<T>&, Var, std::span<const std::int32_t>, double, GradStop);        \
  template Var bpr<T>(Tape<T>&, Var, Var, Var);                                                                 \
  template void adam_step<T>(ParameterStore<T>&, const AdamOptions&);

COGCL_INSTANTIATE(float)
COGCL_INSTANTIATE(double)

#undef COGCL_INSTANTIATE

}  // namespace cogcl::compute
