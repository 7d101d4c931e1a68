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

#include "cogcl/objective.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace cogcl::objective {
namespace {

std::vector<std::int32_t> iota_targets(std::size_t n) {
  std::vector<std::int32_t> t(n);
  std::iota(t.begin(), t.end(), 0);
  return t;
}

std::vector<std::int32_t> offset(std::span<const std::int32_t> ids, std::int32_t by) {
  std::vector<std::int32_t> out(ids.begin(), ids.end());
  for (auto& v : out) v += by;
  return out;
}

template <typename T>
void require_aug(const encoder::ViewRepresentations& views, const char* who) {
  if (!views.aug1 || !views.aug2) throw Error(std::string(who) + ": augmented views were not encoded");
}

}  // namespace

void LossWeights::validate() const {
  if (lambda < 0 || mu < 0 || eta < 0) throw UsageError("loss weights must be nonnegative");
  if (tau <= 0) throw UsageError("temperature must be positive");
}

template <typename T>
Var info_nce(compute::Tape<T>& tape, Var anchors, Var positives, double tau, GradStop stop, Var* sims_out) {
  const Var sims = compute::cosine_sim(tape, anchors, positives);
  if (sims_out) *sims_out = sims;
  const auto targets = iota_targets(static_cast<std::size_t>(tape.value(anchors).rows()));
  return compute::softmax_cross_entropy(tape, sims, targets, tau, stop);
}

template <typename T>
Var info_nce(compute::Tape<T>& tape, Var anchors, Var positives, Var negatives, double tau, GradStop stop) {
  if (tape.value(anchors).rows() != tape.value(positives).rows())
    throw ShapeError("info_nce: anchors and positives differ in row count");
  const Var pool = compute::vstack(tape, positives, negatives);
  return info_nce(tape, anchors, pool, tau, stop);
}

template <typename T>
Var bpr_loss(compute::Tape<T>& tape, Var base, const TrainBatch& batch, std::int32_t num_users) {
  const Var u = compute::gather_rows(tape, base, std::span<const std::int32_t>(batch.users));
  const Var p = compute::gather_rows(tape, base, std::span<const std::int32_t>(offset(batch.pos_items, num_users)));
  const Var n = compute::gather_rows(tape, base, std::span<const std::int32_t>(offset(batch.neg_items, num_users)));
  return compute::bpr(tape, u, p, n);
}

template <typename T>
Var l_aug(compute::Tape<T>& tape, const encoder::ViewRepresentations& views, const TrainBatch& batch,
          std::int32_t num_users, double tau, GradStop stop, SimilarityProbe* probe) {
  require_aug<T>(views, "l_aug");
  std::vector<std::pair<Var, double>> terms;
  const auto add_side = [&](const std::vector<std::int32_t>& rows, const char* side) {
    if (rows.empty()) return;
    const Var a = compute::gather_rows(tape, *views.aug1, std::span<const std::int32_t>(rows));
    const Var b = compute::gather_rows(tape, *views.aug2, std::span<const std::int32_t>(rows));
    Var s12, s21;
    terms.emplace_back(info_nce(tape, a, b, tau, stop, &s12), 1.0);
    terms.emplace_back(info_nce(tape, b, a, tau, stop, &s21), 1.0);
    if (probe) {
      probe->sims.emplace_back(fmt::format("aug.{}.12", side), s12);
      probe->sims.emplace_back(fmt::format("aug.{}.21", side), s21);
    }
  };
  add_side(batch.cl_users, "user");
  add_side(offset(batch.cl_items, num_users), "item");
  if (terms.empty()) return tape.constant(Mat<T>::Zero(1, 1));
  return compute::linear_combination(tape, terms);
}

template <typename T>
Var l_sim(compute::Tape<T>& tape, const encoder::ViewRepresentations& views, const TrainBatch& batch,
          std::int32_t num_users, double tau, GradStop stop, SimilarityProbe* probe) {
  require_aug<T>(views, "l_sim");
  if (batch.user_partners.size() != batch.cl_users.size() || batch.item_partners.size() != batch.cl_items.size())
    throw ShapeError("l_sim: partner lists do not match the batch");
  std::vector<std::pair<Var, double>> terms;
  const auto add_side = [&](const std::vector<std::int32_t>& rows, const std::vector<std::int32_t>& partners,
                            const char* side) {
    if (rows.empty()) return;
    const Var a = compute::gather_rows(tape, *views.aug1, std::span<const std::int32_t>(rows));
    const Var b = compute::gather_rows(tape, *views.aug2, std::span<const std::int32_t>(rows));
    const Var p = compute::gather_rows(tape, views.base, std::span<const std::int32_t>(partners));
    Var s1, s2;
    terms.emplace_back(info_nce(tape, a, p, tau, stop, &s1), 1.0);
    terms.emplace_back(info_nce(tape, b, p, tau, stop, &s2), 1.0);
    if (probe) {
      probe->sims.emplace_back(fmt::format("sim.{}.1", side), s1);
      probe->sims.emplace_back(fmt::format("sim.{}.2", side), s2);
    }
  };
  add_side(batch.cl_users, batch.user_partners, "user");
  add_side(offset(batch.cl_items, num_users), offset(batch.item_partners, num_users), "item");
  if (terms.empty()) return tape.constant(Mat<T>::Zero(1, 1));
  return compute::linear_combination(tape, terms);
}

template <typename T>
Var l_code(compute::Tape<T>& tape, Var base, const TrainBatch& batch, std::int32_t num_users,
           compute::ParameterStore<T>& store, const quantizer::QuantizerConfig& qcfg) {
  std::vector<std::pair<Var, double>> terms;
  const auto add_side = [&](quantizer::Side side, const std::vector<std::int32_t>& rows) {
    if (rows.empty()) return;
    const Var z = compute::gather_rows(tape, base, std::span<const std::int32_t>(rows));
    std::vector<Var> books;
    for (int h = 0; h < qcfg.levels; ++h) books.push_back(tape.parameter(store, quantizer::codebook_name(side, h)));
    const auto book_values = quantizer::codebook_values(store, side, qcfg.levels);
    const auto live = quantizer::assign_codes<T>(tape.value(z), book_values, qcfg);
    terms.emplace_back(quantizer::code_loss(tape, z, std::span<const Var>(books), live.codes, qcfg), 1.0);
  };
  add_side(quantizer::Side::user, batch.cl_users);
  add_side(quantizer::Side::item, offset(batch.cl_items, num_users));
  if (terms.empty()) return tape.constant(Mat<T>::Zero(1, 1));
  return compute::linear_combination(tape, terms);
}

template <typename T>
std::pair<Var, LossBreakdown> total_loss(compute::Tape<T>& tape, const encoder::ViewRepresentations& views,
                                         const TrainBatch& batch, std::int32_t num_users,
                                         compute::ParameterStore<T>& store, const LossWeights& weights,
                                         const quantizer::QuantizerConfig& qcfg, SimilarityProbe* probe) {
  weights.validate();
  LossBreakdown br;
  std::vector<std::pair<Var, double>> terms;
  const Var bpr = bpr_loss(tape, views.base, batch, num_users);
  br.bpr = static_cast<double>(tape.scalar(bpr));
  terms.emplace_back(bpr, 1.0);
  if (weights.lambda > 0) {
    const Var c = l_code(tape, views.base, batch, num_users, store, qcfg);
    br.code = static_cast<double>(tape.scalar(c));
    terms.emplace_back(c, weights.lambda);
  }
  if (weights.mu > 0) {
    const Var a = l_aug(tape, views, batch, num_users, weights.tau, weights.aug_stop, probe);
    br.aug = static_cast<double>(tape.scalar(a));
    terms.emplace_back(a, weights.mu);
  }
  if (weights.eta > 0) {
    const Var s = l_sim(tape, views, batch, num_users, weights.tau, weights.sim_stop, probe);
    br.sim = static_cast<double>(tape.scalar(s));
    terms.emplace_back(s, weights.eta);
  }
  const Var total = compute::linear_combination(tape, terms);
  br.total = static_cast<double>(tape.scalar(total));
  if (!std::isfinite(br.total)) throw NumericError("non-finite loss: " + format_breakdown(br));
  return {total, br};
}

template <typename T>
AlignmentUniformity alignment_uniformity(const Mat<T>& reps, std::span<const std::pair<std::int32_t, std::int32_t>> pairs,
                                         double tau) {
  if (reps.rows() < 2) throw ShapeError("alignment_uniformity needs at least two representations");
  if (tau <= 0) throw UsageError("temperature must be positive");
  const Mat<T> s = compute::cosine_sim_value(reps, reps);
  AlignmentUniformity out;
  double align = 0.0;
  for (const auto& [a, b] : pairs) align += static_cast<double>(s(a, b));
  out.alignment = pairs.empty() ? 0.0 : -align / (tau * static_cast<double>(pairs.size()));
  const Eigen::Index n = s.rows();
  double unif = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) {
    double mx = -1e300;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != a) mx = std::max(mx, static_cast<double>(s(a, j)) / tau);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != a) acc += std::exp(static_cast<double>(s(a, j)) / tau - mx);
    unif += mx + std::log(acc / static_cast<double>(n - 1));
  }
  out.uniformity = unif / static_cast<double>(n);
  return out;
}

std::string format_breakdown(const LossBreakdown& b) {
  return fmt::format("bpr={:.6g} code={:.6g} aug={:.6g} sim={:.6g} total={:.6g}", b.bpr, b.code, b.aug, b.sim, b.total);
}

#define COGCL_INSTANTIATE(T)                                                                                       \
  template Var info_nce<T>(compute::Tape<T>&, Var, Var, double, GradStop, Var*);                                  \
  template Var info_nce<T>(compute::Tape<T>&, Var, Var, Var, double, GradStop);                                   \
  template Var bpr_loss<T>(compute::Tape<T>&, Var, const TrainBatch&, std::int32_t);                              \
  template Var l_aug<T>(compute::Tape<T>&, const encoder::ViewRepresentations&, const TrainBatch&, std::int32_t,  \
                        double, GradStop, SimilarityProbe*);                                                      \
  template Var l_sim<T>(compute::Tape<T>&, const encoder::ViewRepresentations&, const TrainBatch&, std::int32_t,  \
                        double, GradStop, SimilarityProbe*);                                                      \
  template Var l_code<T>(compute::Tape<T>&, Var, const TrainBatch&, std::int32_t, compute::ParameterStore<T>&,    \
                         const quantizer::QuantizerConfig&);                                                      \
  template std::pair<Var, LossBreakdown> total_loss<T>(compute::Tape<T>&, const encoder::ViewRepresentations&,   \
                                                       const TrainBatch&, std::int32_t,                           \
                                                       compute::ParameterStore<T>&, const LossWeights&,           \
                                                       const quantizer::QuantizerConfig&, SimilarityProbe*);      \
  template AlignmentUniformity alignment_uniformity<T>(const Mat<T>&,                                             \
                                                       std::span<const std::pair<std::int32_t, std::int32_t>>,    \
                                                       double);

COGCL_INSTANTIATE(float)
COGCL_INSTANTIATE(double)

#undef COGCL_INSTANTIATE

}  // namespace cogcl::objective
