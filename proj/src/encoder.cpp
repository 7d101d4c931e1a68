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

#include "cogcl/encoder.hpp"

#include <vector>

namespace cogcl::encoder {

using compute::Var;

template <typename T>
Var encode(compute::Tape<T>& tape, const graph::CsrGraph& g, Var x0, const EncoderConfig& cfg, std::uint64_t seed,
           bool train_mode) {
  if (cfg.num_layers < 1) throw UsageError("encoder needs at least one layer");
  if (tape.value(x0).rows() != g.num_nodes())
    throw ShapeError("encode: input has " + std::to_string(tape.value(x0).rows()) + " rows, graph has " +
                     std::to_string(g.num_nodes()) + " nodes");
  Rng rng(seed);
  std::vector<std::pair<Var, double>> layers;
  Var z = x0;
  for (int l = 0; l < cfg.num_layers; ++l) {
    z = compute::spmm(tape, g, compute::dropout(tape, z, cfg.dropout_rate, rng, train_mode));
    layers.emplace_back(z, 1.0 / cfg.num_layers);
  }
  return compute::linear_combination(tape, layers);
}

template <typename T>
Mat<T> encode_value(const graph::CsrGraph& g, const Mat<T>& x0, const EncoderConfig& cfg) {
  if (cfg.num_layers < 1) throw UsageError("encoder needs at least one layer");
  Mat<T> z = x0;
  Mat<T> sum = Mat<T>::Zero(x0.rows(), x0.cols());
  for (int l = 0; l < cfg.num_layers; ++l) {
    z = compute::spmm_value(g, z);
    sum += z;
  }
  return sum / static_cast<T>(cfg.num_layers);
}

template <typename T>
ViewRepresentations encode_all_views(compute::Tape<T>& tape, const graph::CsrGraph& base,
                                     const graph::AugmentedGraphPair* pair, compute::ParameterStore<T>& store,
                                     const EncoderConfig& cfg, const ViewSeeds& seeds, bool train_mode) {
  ViewRepresentations views;
  const Var z0 = tape.parameter(store, kEmbedding);
  views.base = encode(tape, base, z0, cfg, seeds.base, train_mode);
  if (pair != nullptr) {
    const Var zc = tape.parameter(store, kCodeEmbedding);
    const Var z_aug = compute::vstack(tape, z0, zc);
    views.aug1 = encode(tape, pair->graph1, z_aug, cfg, seeds.aug1, train_mode);
    views.aug2 = encode(tape, pair->graph2, z_aug, cfg, seeds.aug2, train_mode);
  }
  return views;
}

template Var encode<float>(compute::Tape<float>&, const graph::CsrGraph&, Var, const EncoderConfig&, std::uint64_t, bool);
template Var encode<double>(compute::Tape<double>&, const graph::CsrGraph&, Var, const EncoderConfig&, std::uint64_t, bool);
template Mat<float> encode_value<float>(const graph::CsrGraph&, const Mat<float>&, const EncoderConfig&);
template Mat<double> encode_value<double>(const graph::CsrGraph&, const Mat<double>&, const EncoderConfig&);
template ViewRepresentations encode_all_views<float>(compute::Tape<float>&, const graph::CsrGraph&,
                                                     const graph::AugmentedGraphPair*, compute::ParameterStore<float>&,
                                                     const EncoderConfig&, const ViewSeeds&, bool);
template ViewRepresentations encode_all_views<double>(compute::Tape<double>&, const graph::CsrGraph&,
                                                      const graph::AugmentedGraphPair*, compute::ParameterStore<double>&,
                                                      const EncoderConfig&, const ViewSeeds&, bool);

}  // namespace cogcl::encoder
