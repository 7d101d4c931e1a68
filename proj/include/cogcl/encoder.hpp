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

#pragma once

#include <cstdint>
#include <optional>

#include "cogcl/compute.hpp"
#include "cogcl/graph.hpp"

namespace cogcl::encoder {

inline constexpr const char* kEmbedding = "embedding";            // users then items
inline constexpr const char* kCodeEmbedding = "code_embedding";   // user codes then item codes

struct EncoderConfig {
  int num_layers = 3;
  int embed_dim = 64;
  double dropout_rate = 0.1;
};

/// Weight-free propagation Z^l = A * dropout(Z^{l-1}) for l = 1..L, read out
/// as the mean of Z^1..Z^L (the input layer is not part of the readout).
/// Dropout masks are drawn from `seed`, so each call with a new seed gets
/// fresh masks.
template <typename T>
compute::Var encode(compute::Tape<T>& tape, const graph::CsrGraph& g, compute::Var x0, const EncoderConfig& cfg,
                    std::uint64_t seed, bool train_mode);

/// Eval-mode propagation without a tape.
template <typename T>
Mat<T> encode_value(const graph::CsrGraph& g, const Mat<T>& x0, const EncoderConfig& cfg);

struct ViewSeeds {
  std::uint64_t base = 0;
  std::uint64_t aug1 = 0;
  std::uint64_t aug2 = 0;
};

/// Base view over (users, items); the augmented views cover the full
/// augmented node space and are present only when a graph pair is supplied.
struct ViewRepresentations {
  compute::Var base;
  std::optional<compute::Var> aug1;
  std::optional<compute::Var> aug2;
};

/// Base view from (base graph, Z0); augmented views from (G1, [Z0; Zc]) and
/// (G2, [Z0; Zc]).
template <typename T>
ViewRepresentations encode_all_views(compute::Tape<T>& tape, const graph::CsrGraph& base,
                                     const graph::AugmentedGraphPair* pair, compute::ParameterStore<T>& store,
                                     const EncoderConfig& cfg, const ViewSeeds& seeds, bool train_mode);

}  // namespace cogcl::encoder
