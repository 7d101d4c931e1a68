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

// Training objective: BPR on the base view, the code loss, and the two
// contrastive terms (augmented-view alignment and semantic-neighbour
// alignment).

#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cogcl/compute.hpp"
#include "cogcl/encoder.hpp"
#include "cogcl/quantizer.hpp"
#include "cogcl/sampling.hpp"

namespace cogcl::objective {

using compute::GradStop;
using compute::Var;

struct LossWeights {
  double lambda = 1.0;  // code
  double mu = 0.1;      // augmented-view CL
  double eta = 0.1;     // semantic-neighbour CL
  double tau = 0.2;
  GradStop aug_stop = GradStop::none;
  GradStop sim_stop = GradStop::none;

  void validate() const;
};

struct LossBreakdown {
  double bpr = 0.0;
  double code = 0.0;
  double aug = 0.0;
  double sim = 0.0;
  double total = 0.0;
};

/// Similarity matrices created while building the loss, labelled e.g.
/// "aug.user.12" or "sim.item.1". Lets callers inspect per-entry gradients.
struct SimilarityProbe {
  std::vector<std::pair<std::string, Var>> sims;
};

/// Row-aligned InfoNCE: anchor r is paired with positives row r and the pool is
/// every positives row.
template <typename T>
Var info_nce(compute::Tape<T>& tape, Var anchors, Var positives, double tau, GradStop stop = GradStop::none,
             Var* sims_out = nullptr);

/// InfoNCE with an explicit negative pool appended after each anchor's
/// positive: pool = [positives; negatives].
template <typename T>
Var info_nce(compute::Tape<T>& tape, Var anchors, Var positives, Var negatives, double tau,
             GradStop stop = GradStop::none);

template <typename T>
Var bpr_loss(compute::Tape<T>& tape, Var base, const TrainBatch& batch, std::int32_t num_users);

/// Bidirectional InfoNCE between the two augmented views, users plus items.
template <typename T>
Var l_aug(compute::Tape<T>& tape, const encoder::ViewRepresentations& views, const TrainBatch& batch,
          std::int32_t num_users, double tau, GradStop stop, SimilarityProbe* probe = nullptr);

/// Each augmented view against the base-view representation of the sampled
/// semantic partner, users plus items. The pool is the batch's partners.
template <typename T>
Var l_sim(compute::Tape<T>& tape, const encoder::ViewRepresentations& views, const TrainBatch& batch,
          std::int32_t num_users, double tau, GradStop stop, SimilarityProbe* probe = nullptr);

/// Code loss on the base-view rows of the batch's distinct users and items,
/// with codes assigned live from the current parameters.
template <typename T>
Var l_code(compute::Tape<T>& tape, Var base, const TrainBatch& batch, std::int32_t num_users,
           compute::ParameterStore<T>& store, const quantizer::QuantizerConfig& qcfg);

/// bpr + lambda*code + mu*aug + eta*sim. Terms with zero weight are not built.
/// Throws NumericError carrying the breakdown if the value is not finite.
template <typename T>
std::pair<Var, LossBreakdown> total_loss(compute::Tape<T>& tape, const encoder::ViewRepresentations& views,
                                         const TrainBatch& batch, std::int32_t num_users,
                                         compute::ParameterStore<T>& store, const LossWeights& weights,
                                         const quantizer::QuantizerConfig& qcfg, SimilarityProbe* probe = nullptr);

struct AlignmentUniformity {
  double alignment = 0.0;
  double uniformity = 0.0;
};

/// alignment = -(1/tau) mean cos(z_a, z_b) over pairs;
/// uniformity = mean over anchors of log mean_{j != a} exp(cos(z_a, z_j)/tau).
template <typename T>
AlignmentUniformity alignment_uniformity(const Mat<T>& reps, std::span<const std::pair<std::int32_t, std::int32_t>> pairs,
                                         double tau);

std::string format_breakdown(const LossBreakdown& b);

}  // namespace cogcl::objective
