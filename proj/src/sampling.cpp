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

#include "cogcl/sampling.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <unordered_set>

namespace cogcl::objective {
namespace {

// Distinct co-interactors of each entity through a shared neighbour, reservoir
// sampled down to `cap`.
std::vector<std::vector<std::int32_t>> co_interactors(const std::vector<std::vector<std::int32_t>>& own,
                                                      const std::vector<std::vector<std::int32_t>>& other,
                                                      std::size_t cap, std::uint64_t seed, std::uint64_t side_tag) {
  const std::size_t n = own.size();
  std::vector<std::vector<std::int32_t>> out(n);
  std::vector<std::int64_t> stamp(n, -1);
  for (std::size_t e = 0; e < n; ++e) {
    Rng rng(derive_seed(seed, {side_tag, e}));
    auto& res = out[e];
    std::size_t seen = 0;
    stamp[e] = static_cast<std::int64_t>(e);
    for (std::int32_t nb : own[e]) {
      for (std::int32_t v : other[static_cast<std::size_t>(nb)]) {
        if (stamp[static_cast<std::size_t>(v)] == static_cast<std::int64_t>(e)) continue;
        stamp[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(e);
        ++seen;
        if (res.size() < cap) {
          res.push_back(v);
        } else if (cap > 0) {
          std::uniform_int_distribution<std::size_t> pick(0, seen - 1);
          const std::size_t j = pick(rng);
          if (j < cap) res[j] = v;
        }
      }
    }
    std::sort(res.begin(), res.end());
  }
  return out;
}

}  // namespace

PositiveIndex::SideIndex PositiveIndex::build_side(const IndexMat& codes, int levels, bool use_codes) {
  SideIndex s;
  s.levels = levels;
  s.use_codes = use_codes;
  s.codes = codes;
  if (!use_codes) return s;
  const Eigen::Index n = codes.rows();
  s.bucket_of = IndexMat::Constant(n, levels, -1);
  for (int m = 0; m < levels; ++m) {
    std::map<std::vector<std::int32_t>, std::int32_t> ids;
    std::vector<std::int32_t> key(static_cast<std::size_t>(std::max(0, levels - 1)));
    for (Eigen::Index e = 0; e < n; ++e) {
      std::size_t k = 0;
      for (int h = 0; h < levels; ++h)
        if (h != m) key[k++] = codes(e, h);
      auto [it, inserted] = ids.try_emplace(key, static_cast<std::int32_t>(s.buckets.size()));
      if (inserted) s.buckets.emplace_back();
      s.buckets[static_cast<std::size_t>(it->second)].push_back(static_cast<std::int32_t>(e));
      s.bucket_of(e, m) = it->second;
    }
  }
  return s;
}

PositiveIndex PositiveIndex::build(const CodeAssignment& codes, const data::InteractionDataset& ds,
                                   const PositiveIndexOptions& opts) {
  if (codes.user_codes.rows() != ds.num_users || codes.item_codes.rows() != ds.num_items)
    throw ShapeError("positive index: codes do not cover the dataset");
  PositiveIndex idx;
  idx.users_ = build_side(codes.user_codes, codes.levels, opts.shared_codes);
  idx.items_ = build_side(codes.item_codes, codes.levels, opts.shared_codes);
  const auto ui = ds.user_items(ds.train);
  const auto iu = ds.item_users(ds.train);
  if (opts.shared_targets) {
    idx.users_.targets = co_interactors(ui, iu, opts.target_cap, opts.seed, 0x75);
    idx.items_.targets = co_interactors(iu, ui, opts.target_cap, opts.seed, 0x69);
  } else {
    idx.users_.targets.assign(static_cast<std::size_t>(ds.num_users), {});
    idx.items_.targets.assign(static_cast<std::size_t>(ds.num_items), {});
  }
  for (SideIndex* s : {&idx.users_, &idx.items_}) {
    const std::size_t n = s->targets.size();
    s->has_positive.assign(n, 0);
    for (std::size_t e = 0; e < n; ++e) {
      bool any = !s->targets[e].empty();
      for (int m = 0; s->use_codes && !any && m < s->levels; ++m)
        any = s->buckets[static_cast<std::size_t>(s->bucket_of(static_cast<Eigen::Index>(e), m))].size() > 1;
      s->has_positive[e] = any ? 1 : 0;
    }
  }
  return idx;
}

int PositiveIndex::code_multiplicity(const SideIndex& s, std::int32_t a, std::int32_t b) {
  if (!s.use_codes) return 0;
  int mismatches = 0;
  for (int h = 0; h < s.levels; ++h) mismatches += s.codes(a, h) != s.codes(b, h) ? 1 : 0;
  if (mismatches == 0) return s.levels;
  return mismatches == 1 ? 1 : 0;
}

std::vector<std::int32_t> PositiveIndex::positives(Side which, std::int32_t e) const {
  const SideIndex& s = side(which);
  std::vector<std::int32_t> out(s.targets.at(static_cast<std::size_t>(e)));
  if (s.use_codes)
    for (int m = 0; m < s.levels; ++m) {
      const auto& b = s.buckets[static_cast<std::size_t>(s.bucket_of(e, m))];
      out.insert(out.end(), b.begin(), b.end());
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.erase(std::remove(out.begin(), out.end(), e), out.end());
  return out;
}

bool PositiveIndex::has_positive(Side which, std::int32_t e) const {
  return side(which).has_positive.at(static_cast<std::size_t>(e)) != 0;
}

std::int32_t PositiveIndex::sample(Side which, std::int32_t e, Rng& rng) const {
  const SideIndex& s = side(which);
  if (!has_positive(which, e)) return e;
  const auto& targets = s.targets[static_cast<std::size_t>(e)];
  std::size_t code_mass = 0;
  if (s.use_codes)
    for (int m = 0; m < s.levels; ++m) code_mass += s.buckets[static_cast<std::size_t>(s.bucket_of(e, m))].size();
  std::uniform_int_distribution<std::size_t> pick(0, code_mass + targets.size() - 1);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  // Draw from the multiset of (bucket members, targets) and thin by the
  // candidate's multiplicity, which leaves a uniform draw over the union.
  while (true) {
    std::size_t r = pick(rng);
    std::int32_t v = -1;
    if (r < code_mass) {
      for (int m = 0; m < s.levels; ++m) {
        const auto& b = s.buckets[static_cast<std::size_t>(s.bucket_of(e, m))];
        if (r < b.size()) {
          v = b[r];
          break;
        }
        r -= b.size();
      }
    } else {
      v = targets[r - code_mass];
    }
    if (v == e) continue;
    const int mult = code_multiplicity(s, e, v) + (std::binary_search(targets.begin(), targets.end(), v) ? 1 : 0);
    if (mult == 1 || u01(rng) * mult < 1.0) return v;
  }
}

std::int64_t PositiveIndex::count_without_positive(Side which) const {
  const auto& hp = side(which).has_positive;
  return std::count(hp.begin(), hp.end(), 0);
}

BatchSampler::BatchSampler(const data::InteractionDataset& ds) : ds_(&ds), user_items_(ds.user_items(ds.train)) {}

bool BatchSampler::interacted(std::int32_t user, std::int32_t item) const {
  const auto& items = user_items_.at(static_cast<std::size_t>(user));
  return std::binary_search(items.begin(), items.end(), item);
}

std::int32_t BatchSampler::sample_negative(std::int32_t user, Rng& rng) const {
  if (static_cast<std::int64_t>(user_items_.at(static_cast<std::size_t>(user)).size()) >= ds_->num_items)
    throw Error("user " + std::to_string(user) + " has interacted with every item; no negative exists");
  std::uniform_int_distribution<std::int32_t> pick(0, ds_->num_items - 1);
  while (true) {
    const std::int32_t i = pick(rng);
    if (!interacted(user, i)) return i;
  }
}

TrainBatch BatchSampler::make_batch(std::span<const data::Pair> pairs, const PositiveIndex* index, Rng& rng) const {
  TrainBatch b;
  b.users.reserve(pairs.size());
  b.pos_items.reserve(pairs.size());
  b.neg_items.reserve(pairs.size());
  std::unordered_set<std::int32_t> seen_users, seen_items;
  for (const auto& [u, i] : pairs) {
    b.users.push_back(u);
    b.pos_items.push_back(i);
    b.neg_items.push_back(sample_negative(u, rng));
    if (seen_users.insert(u).second) b.cl_users.push_back(u);
    if (seen_items.insert(i).second) b.cl_items.push_back(i);
  }
  for (std::int32_t u : b.cl_users) {
    if (index == nullptr || !index->has_positive(Side::user, u)) ++b.users_without_positive;
    b.user_partners.push_back(index ? index->sample(Side::user, u, rng) : u);
  }
  for (std::int32_t i : b.cl_items) {
    if (index == nullptr || !index->has_positive(Side::item, i)) ++b.items_without_positive;
    b.item_partners.push_back(index ? index->sample(Side::item, i, rng) : i);
  }
  return b;
}

TrainBatch BatchSampler::sample(std::size_t batch_size, const PositiveIndex* index, Rng& rng) const {
  if (ds_->train.empty()) throw Error("cannot sample from an empty train split");
  std::uniform_int_distribution<std::size_t> pick(0, ds_->train.size() - 1);
  std::vector<data::Pair> pairs;
  pairs.reserve(batch_size);
  for (std::size_t k = 0; k < batch_size; ++k) pairs.push_back(ds_->train[pick(rng)]);
  return make_batch(pairs, index, rng);
}

TrainBatch sample_batch(const data::InteractionDataset& ds, const PositiveIndex* index, std::size_t batch_size,
                        std::uint64_t seed) {
  Rng rng(seed);
  return BatchSampler(ds).sample(batch_size, index, rng);
}

}  // namespace cogcl::objective
