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

// Multi-level vector quantization of user/item representations with
// cosine-softmax assignment. Residual quantization (RQ) feeds each level the
// residual left by the previous one; product quantization (PQ) hands each
// level its own slice of the vector.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cogcl/codes.hpp"
#include "cogcl/compute.hpp"
#include "cogcl/encoder.hpp"

namespace cogcl::quantizer {

enum class Scheme { rq, pq };
enum class Side { user, item };

Scheme parse_scheme(const std::string& name);
const char* to_string(Scheme s);

struct QuantizerConfig {
  Scheme scheme = Scheme::rq;
  int levels = 4;
  int codebook_size = 256;
  double tau = 0.2;

  /// Throws UsageError on H < 1, K < 2, tau <= 0, or a PQ split that does not
  /// divide the embedding dimension.
  void validate(int embed_dim) const;
};

/// Store entry name of one level's codebook, e.g. "user_codebook.2".
std::string codebook_name(Side side, int level);

/// Width of each codebook vector: d for RQ, d/H for PQ.
int codebook_dim(const QuantizerConfig& cfg, int embed_dim);

/// Adds 2*H codebooks of K random unit-norm rows.
template <typename T>
void init_codebooks(compute::ParameterStore<T>& store, const QuantizerConfig& cfg, int embed_dim, Rng& rng);

template <typename T>
std::vector<const Mat<T>*> codebook_values(const compute::ParameterStore<T>& store, Side side, int levels);

template <typename T>
struct LevelAssignment {
  IndexMat codes;                   // n x H
  std::vector<Mat<T>> level_inputs; // z^h for h = 1..H
};

/// c^h = argmax_k cos(z^h, e_k^h), ties to the lowest index. Since softmax is
/// monotone this is also argmax_k P(k | z^h) for every temperature.
template <typename T>
LevelAssignment<T> assign_codes(const Mat<T>& z, std::span<const Mat<T>* const> books, const QuantizerConfig& cfg);

/// (1/H) sum_h mean_n -log softmax(cos(z^h, C^h) / tau)[c^h]. Gradients reach
/// both the representations and every codebook, including through the RQ
/// residual chain. The argmax itself is not differentiated.
template <typename T>
compute::Var code_loss(compute::Tape<T>& tape, compute::Var z, std::span<const compute::Var> books,
                       const IndexMat& codes, const QuantizerConfig& cfg);

/// Eval-mode base-view encoding of every user and item followed by a full
/// assignment. Pure function of the parameters.
template <typename T>
CodeAssignment refresh_codes(const compute::ParameterStore<T>& store, const graph::CsrGraph& base,
                             const encoder::EncoderConfig& enc, const QuantizerConfig& cfg, int epoch);

struct LevelUsage {
  int distinct = 0;
  double max_share = 0.0;  // fraction of entities on the most popular code
};

/// Collapse diagnostic per level.
std::vector<LevelUsage> code_usage(const IndexMat& codes, int codebook_size);

}  // namespace cogcl::quantizer
