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

#include <doctest.h>

#include <fstream>
#include <set>

#include "cogcl/data.hpp"
#include "support/fixtures.hpp"

using namespace cogcl;
using namespace cogcl::data;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto dir = testing::scratch_dir("data_" + name);
  const auto p = dir / "log.tsv";
  std::ofstream(p) << text;
  return p;
}

RawInteractions raw_of(const std::vector<std::pair<std::string, std::string>>& pairs) {
  RawInteractions raw;
  for (const auto& [u, i] : pairs) raw.records.push_back({u, i, std::nullopt});
  return raw;
}

std::set<std::pair<std::string, std::string>> pair_set(const RawInteractions& raw) {
  std::set<std::pair<std::string, std::string>> s;
  for (const auto& r : raw.records) s.insert({r.user, r.item});
  return s;
}

}  // namespace

TEST_CASE("load_interactions parses two-column logs") {
  const auto raw = load_interactions(write_file("two", "u1\ti1\nu1\ti2\n"), InputFormat::tsv);
  REQUIRE(raw.records.size() == 2);
  CHECK(raw.records[0].user == "u1");
  CHECK(raw.records[1].item == "i2");
  CHECK(raw.malformed_lines == 0);
}

TEST_CASE("load_interactions handles empty files and malformed lines") {
  CHECK(load_interactions(write_file("empty", ""), InputFormat::tsv).records.empty());
  const auto raw = load_interactions(write_file("bad", "u1\n"), InputFormat::tsv);
  CHECK(raw.records.empty());
  CHECK(raw.malformed_lines == 1);
}

TEST_CASE("load_interactions reads timestamps, csv and headers") {
  const auto raw = load_interactions(write_file("csv", "user,item,time\na,x,5\nb,y,3\n"), InputFormat::csv);
  CHECK(raw.had_header);
  REQUIRE(raw.records.size() == 2);
  CHECK(raw.records[0].timestamp == 5);
}

TEST_CASE("load_interactions rejects mostly malformed input and missing files") {
  CHECK_THROWS_AS(load_interactions(write_file("junk", "a\nb\nc\nu\ti\n"), InputFormat::tsv), ParseError);
  CHECK_THROWS_AS(load_interactions("/nonexistent/cogcl.tsv", InputFormat::tsv), IoError);
}

TEST_CASE("deduplicate keeps the earliest timestamp") {
  RawInteractions raw;
  raw.records = {{"u", "i", 9}, {"u", "i", 2}, {"u", "j", 4}};
  const auto d = deduplicate(raw);
  REQUIRE(d.records.size() == 2);
  CHECK(d.records[0].timestamp == 2);
}

TEST_CASE("k_core_filter threshold, fixed point and cascade") {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int k = 0; k < 6; ++k)
    for (const char* u : {"a", "c", "d", "e", "f"}) pairs.push_back({u, "i" + std::to_string(k)});
  pairs.push_back({"b", "i0"});
  pairs.push_back({"b", "z"});
  const auto out = k_core_filter(raw_of(pairs), 5, 5);
  for (const auto& r : out.records) CHECK(r.user != "b");
  CHECK(out.records.size() == 30);
  CHECK(pair_set(k_core_filter(out, 5, 5)) == pair_set(out));

  const auto chain = raw_of({{"u1", "i1"}, {"u2", "i1"}, {"u2", "i2"}});
  CHECK_THROWS_AS(k_core_filter(chain, 2, 2), Error);
}

TEST_CASE("k_core_filter postcondition holds on random logs") {
  std::mt19937_64 rng(1);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int n = 0; n < 3000; ++n)
    pairs.push_back({"u" + std::to_string(rng() % 120), "i" + std::to_string(rng() % 90)});
  const auto out = k_core_filter(raw_of(pairs), 5, 4);
  std::map<std::string, int> ud, id;
  for (const auto& r : out.records) {
    ud[r.user]++;
    id[r.item]++;
  }
  for (const auto& [u, d] : ud) CHECK(d >= 5);
  for (const auto& [i, d] : id) CHECK(d >= 4);
}

TEST_CASE("split_dataset applies the floor rule per user") {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int k = 0; k < 10; ++k) pairs.push_back({"big", "i" + std::to_string(k)});
  for (int k = 0; k < 3; ++k) pairs.push_back({"small", "i" + std::to_string(k)});
  // Two-interaction users keep everything in train, so every item reaches train.
  for (int k = 0; k < 10; k += 2) {
    pairs.push_back({"f" + std::to_string(k), "i" + std::to_string(k)});
    pairs.push_back({"f" + std::to_string(k), "i" + std::to_string(k + 1)});
  }
  const auto ds = split_dataset(raw_of(pairs), {}, 3);
  const auto big = *ds.user_vocab.find("big"), small = *ds.user_vocab.find("small");
  const auto count = [](const std::vector<Pair>& s, std::int32_t u) {
    return std::count_if(s.begin(), s.end(), [&](const Pair& p) { return p.first == u; });
  };
  CHECK(count(ds.train, big) == 8);
  CHECK(count(ds.valid, big) == 1);
  CHECK(count(ds.test, big) == 1);
  CHECK(count(ds.train, small) == 3);
  CHECK(count(ds.valid, small) == 0);
  CHECK(split_dataset(raw_of(pairs), {}, 3) == ds);
}

TEST_CASE("split_dataset puts the latest interactions in test") {
  RawInteractions raw;
  for (int k = 0; k < 10; ++k) {
    raw.records.push_back({"u", "i" + std::to_string(k), 100 - k});
    raw.records.push_back({"f" + std::to_string(k), "i" + std::to_string(k), 0});
  }
  const auto ds = split_dataset(raw, {}, 0);
  const auto u = *ds.user_vocab.find("u");
  REQUIRE(ds.test.size() == 1);
  CHECK(ds.test[0].first == u);
  CHECK(ds.item_vocab.token(ds.test[0].second) == "i0");
  CHECK(ds.item_vocab.token(ds.valid[0].second) == "i1");
}

TEST_CASE("split_dataset output is disjoint and densely indexed") {
  std::mt19937_64 rng(5);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int n = 0; n < 2000; ++n)
    pairs.push_back({"u" + std::to_string(rng() % 60), "i" + std::to_string(rng() % 200)});
  const auto ds = split_dataset(deduplicate(raw_of(pairs)), {}, 11);
  std::set<Pair> tr(ds.train.begin(), ds.train.end()), va(ds.valid.begin(), ds.valid.end());
  std::set<std::int32_t> train_items;
  for (const auto& p : ds.train) train_items.insert(p.second);
  CHECK(static_cast<std::int32_t>(train_items.size()) == ds.num_items);
  for (const auto& p : ds.valid) CHECK(!tr.count(p));
  for (const auto& p : ds.test) {
    CHECK(!tr.count(p));
    CHECK(!va.count(p));
  }
}

TEST_CASE("save_dataset and load_dataset round-trip") {
  const auto ds = testing::random_dataset(12, 20, 0.3, 4);
  const auto dir = testing::scratch_dir("data_roundtrip");
  save_dataset(ds, dir / "ds");
  CHECK(load_dataset(dir / "ds") == ds);
  CHECK_THROWS_AS(load_dataset(dir / "missing"), IoError);
  std::ofstream(dir / "ds" / "meta.json") << "{\"version\": 99}";
  CHECK_THROWS_AS(load_dataset(dir / "ds"), FormatError);
}

TEST_CASE("dataset_stats counts every split") {
  const auto ds = testing::make_dataset(2, 3, {{0, 0}, {1, 1}}, {{0, 1}}, {{1, 2}});
  const auto st = dataset_stats(ds);
  CHECK(st.users == 2);
  CHECK(st.items == 3);
  CHECK(st.interactions == 4);
  CHECK(st.sparsity == doctest::Approx(1.0 - 4.0 / 6.0));
}
