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

#include "cogcl/quantizer.hpp"

#include <algorithm>
#include <random>

namespace cogcl::quantizer {

using compute::Var;

Scheme parse_scheme(const std::string& name) {
  if (name == "rq") return Scheme::rq;
  if (name == "pq") return Scheme::pq;
  throw UsageError("unknown quantization scheme '" + name + "' (expected rq or pq)");
}

const char* to_string(Scheme s) { return s == Scheme::rq ? "rq" : "pq"; }

void QuantizerConfig::validate(int embed_dim) const {
  if (levels < 1) throw UsageError("number of code levels must be >= 1");
  if (codebook_size < 2) throw UsageError("codebook size must be >= 2");
  if (tau <= 0.0) throw UsageError("temperature must be positive");
  if (scheme == Scheme::pq && embed_dim % levels != 0)
    throw UsageError("PQ needs the embedding dimension (" + std::to_string(embed_dim) + ") divisible by the level count (" +
                     std::to_string(levels) + ")");
}

std::string codebook_name(Side side, int level) {
  return std::string(side == Side::user ? "user_codebook." : "item_codebook.") + std::to_string(level);
}

int codebook_dim(const QuantizerConfig& cfg, int embed_dim) {
  return cfg.scheme == Scheme::rq ? embed_dim : embed_dim / cfg.levels;
}

template <typename T>
void init_codebooks(compute::ParameterStore<T>& store, const QuantizerConfig& cfg, int embed_dim, Rng& rng) {
  cfg.validate(embed_dim);
  const int width = codebook_dim(cfg, embed_dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Side side : {Side::user, Side::item}) {
    for (int h = 0; h < cfg.levels; ++h) {
      Mat<T> book(cfg.codebook_size, width);
      for (Eigen::Index k = 0; k < book.size(); ++k) book.data()[k] = static_cast<T>(gauss(rng));
      book.rowwise().normalize();
      store.add(codebook_name(side, h), std::move(book));
    }
  }
}

template <typename T>
std::vector<const Mat<T>*> codebook_values(const compute::ParameterStore<T>& store, Side side, int levels) {
  std::vector<const Mat<T>*> out;
  for (int h = 0; h < levels; ++h) out.push_back(&store.at(codebook_name(side, h)).value);
  return out;
}

namespace {

template <typename T>
void argmax_rows(const Mat<T>& sims, IndexMat& codes, int level) {
  for (Eigen::Index r = 0; r < sims.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < sims.cols(); ++k)
      if (sims(r, k) > sims(r, best)) best = k;
    codes(r, level) = static_cast<std::int32_t>(best);
  }
}

}  // namespace

template <typename T>
LevelAssignment<T> assign_codes(const Mat<T>& z, std::span<const Mat<T>* const> books, const QuantizerConfig& cfg) {
  cfg.validate(static_cast<int>(z.cols()));
  if (static_cast<int>(books.size()) != cfg.levels) throw ShapeError("assign_codes: wrong number of codebooks");
  const int width = codebook_dim(cfg, static_cast<int>(z.cols()));
  for (const auto* b : books)
    if (b->cols() != width || b->rows() != cfg.codebook_size) throw ShapeError("assign_codes: codebook shape mismatch");

  LevelAssignment<T> out;
  out.codes = IndexMat::Zero(z.rows(), cfg.levels);
  if (cfg.scheme == Scheme::rq) {
    Mat<T> residual = z;
    for (int h = 0; h < cfg.levels; ++h) {
      out.level_inputs.push_back(residual);
      argmax_rows(compute::cosine_sim_value(residual, *books[static_cast<std::size_t>(h)]), out.codes, h);
      for (Eigen::Index r = 0; r < z.rows(); ++r) residual.row(r) -= books[static_cast<std::size_t>(h)]->row(out.codes(r, h));
    }
  } else {
    for (int h = 0; h < cfg.levels; ++h) {
      Mat<T> part = z.middleCols(std::int64_t{h} * width, width);
      argmax_rows(compute::cosine_sim_value(part, *books[static_cast<std::size_t>(h)]), out.codes, h);
      out.level_inputs.push_back(std::move(part));
    }
  }
  return out;
}

template <typename T>
Var code_loss(compute::Tape<T>& tape, Var z, std::span<const Var> books, const IndexMat& codes, const QuantizerConfig& cfg) {
  if (static_cast<int>(books.size()) != cfg.levels || codes.cols() != cfg.levels ||
      codes.rows() != tape.value(z).rows())
    throw ShapeError("code_loss: inconsistent level count or batch size");
  const int width = codebook_dim(cfg, static_cast<int>(tape.value(z).cols()));
  std::vector<std::pair<Var, double>> terms;
  Var level_input = z;
  for (int h = 0; h < cfg.levels; ++h) {
    std::vector<std::int32_t> targets(static_cast<std::size_t>(codes.rows()));
    for (Eigen::Index r = 0; r < codes.rows(); ++r) targets[static_cast<std::size_t>(r)] = codes(r, h);
    const Var book = books[static_cast<std::size_t>(h)];
    Var input = cfg.scheme == Scheme::rq ? level_input : compute::slice_cols(tape, z, std::int64_t{h} * width, width);
    Var sims = compute::cosine_sim(tape, input, book);
    terms.emplace_back(compute::softmax_cross_entropy(tape, sims, targets, cfg.tau), 1.0 / cfg.levels);
    if (cfg.scheme == Scheme::rq && h + 1 < cfg.levels)
      level_input = compute::sub(tape, level_input, compute::gather_rows(tape, book, targets));
  }
  return compute::linear_combination(tape, terms);
}

template <typename T>
CodeAssignment refresh_codes(const compute::ParameterStore<T>& store, const graph::CsrGraph& base,
                             const encoder::EncoderConfig& enc, const QuantizerConfig& cfg, int epoch) {
  const Mat<T> reps = encoder::encode_value(base, store.at(encoder::kEmbedding).value, enc);
  const auto& layout = base.layout();
  const Mat<T> users = reps.topRows(layout.num_users);
  const Mat<T> items = reps.middleRows(layout.num_users, layout.num_items);
  CodeAssignment out;
  out.levels = cfg.levels;
  out.codebook_size = cfg.codebook_size;
  out.epoch = epoch;
  const auto ub = codebook_values(store, Side::user, cfg.levels);
  const auto ib = codebook_values(store, Side::item, cfg.levels);
  out.user_codes = assign_codes<T>(users, ub, cfg).codes;
  out.item_codes = assign_codes<T>(items, ib, cfg).codes;
  return out;
}

std::vector<LevelUsage> code_usage(const IndexMat& codes, int codebook_size) {
  std::vector<LevelUsage> out;
  for (Eigen::Index h = 0; h < codes.cols(); ++h) {
    std::vector<std::int64_t> hist(static_cast<std::size_t>(codebook_size), 0);
    for (Eigen::Index r = 0; r < codes.rows(); ++r) ++hist[static_cast<std::size_t>(codes(r, h))];
    LevelUsage u;
    u.distinct = static_cast<int>(std::count_if(hist.begin(), hist.end(), [](std::int64_t c) { return c > 0; }));
    const auto mx = *std::max_element(hist.begin(), hist.end());
    u.max_share = codes.rows() > 0 ? static_cast<double>(mx) / static_cast<double>(codes.rows()) : 0.0;
    out.push_back(u);
  }
  return out;
}

#define COGCL_INSTANTIATE(T)                                                                                   \
  template void init_codebooks<T>(compute::ParameterStore<T>&, const QuantizerConfig&, int, Rng&);            \
  template std::vector<const Mat<T>*> codebook_values<T>(const compute::ParameterStore<T>&, Side, int);      \
  template LevelAssignment<T> assign_codes<T>(const Mat<T>&, std::span<const Mat<T>* const>,                  \
                                              const QuantizerConfig&);                                        \
  template Var code_loss<T>(compute::Tape<T>&, Var, std::span<const Var>, const IndexMat&,                    \
                            const QuantizerConfig&);                                                          \
  template CodeAssignment refresh_codes<T>(const compute::ParameterStore<T>&, const graph::CsrGraph&,        \
                                           const encoder::EncoderConfig&, const QuantizerConfig&, int);

COGCL_INSTANTIATE(float)
COGCL_INSTANTIATE(double)

#undef COGCL_INSTANTIATE

}  // namespace cogcl::quantizer
