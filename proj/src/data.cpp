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

#include "cogcl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cogcl/common.hpp"

namespace cogcl::data {
namespace {

std::vector<std::string_view> split_line(std::string_view line, char sep) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cols;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // Accept integral floats such as "978300760.0".
    double d = 0;
    auto [p2, e2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (e2 != std::errc() || p2 != s.data() + s.size() || d != std::floor(d)) return std::nullopt;
    return static_cast<std::int64_t>(d);
  }
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

void write_pairs(const std::filesystem::path& path, const std::vector<Pair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [u, i] : pairs) out << u << '\t' << i << '\n';
}

void write_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::int32_t k = 0; k < vocab.size(); ++k) out << vocab.token(k) << '\t' << k << '\n';
}

std::vector<Pair> read_pairs(const std::filesystem::path& path, std::int32_t num_users, std::int32_t num_items) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<Pair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto cols = split_line(trim(line), '\t');
    if (cols.size() != 2) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 2 columns");
    auto u = parse_int(cols[0]);
    auto i = parse_int(cols[1]);
    if (!u || !i || *u < 0 || *u >= num_users || *i < 0 || *i >= num_items)
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": index out of range");
    pairs.emplace_back(static_cast<std::int32_t>(*u), static_cast<std::int32_t>(*i));
  }
  return pairs;
}

Vocab read_vocab(const std::filesystem::path& path, std::int32_t expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Vocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    auto cols = split_line(trim(line), '\t');
    if (cols.size() != 2) throw FormatError(path.string() + ": expected token<TAB>index");
    auto idx = parse_int(cols[1]);
    if (!idx || *idx != vocab.size()) throw FormatError(path.string() + ": indices must be dense and ordered");
    vocab.add(std::string(cols[0]));
  }
  if (vocab.size() != expected)
    throw FormatError(path.string() + ": has " + std::to_string(vocab.size()) + " entries, meta says " +
                      std::to_string(expected));
  return vocab;
}

}  // namespace

InputFormat parse_input_format(const std::string& name) {
  if (name == "tsv") return InputFormat::tsv;
  if (name == "csv") return InputFormat::csv;
  throw UsageError("unknown input format '" + name + "' (expected tsv or csv)");
}

RawInteractions load_interactions(const std::filesystem::path& path, InputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open interaction file " + path.string());
  const char sep = format == InputFormat::tsv ? '\t' : ',';

  RawInteractions raw;
  std::string line;
  std::size_t total = 0;
  bool first = true;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.empty()) continue;
    ++total;
    auto cols = split_line(view, sep);
    if (first) {
      first = false;
      bool header = false;
      if (cols.size() >= 3 && !parse_int(trim(cols[2]))) header = true;
      if (cols.size() == 2 && lower(trim(cols[0])) == "user_id" && lower(trim(cols[1])) == "item_id") header = true;
      if (header) {
        raw.had_header = true;
        --total;
        continue;
      }
    }
    if (cols.size() < 2 || trim(cols[0]).empty() || trim(cols[1]).empty()) {
      ++raw.malformed_lines;
      continue;
    }
    RawRecord rec{std::string(trim(cols[0])), std::string(trim(cols[1])), std::nullopt};
    if (cols.size() >= 3 && !trim(cols[2]).empty()) {
      auto ts = parse_int(trim(cols[2]));
      if (!ts || *ts < 0) {
        ++raw.malformed_lines;
        continue;
      }
      rec.timestamp = *ts;
    }
    raw.records.push_back(std::move(rec));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());

  if (total == 0) spdlog::warn("interaction file {} contains no records", path.string());
  if (raw.malformed_lines > 1 && static_cast<double>(raw.malformed_lines) > 0.01 * static_cast<double>(total)) {
    throw ParseError(path.string() + ": " + std::to_string(raw.malformed_lines) + " of " + std::to_string(total) +
                     " lines are malformed (more than 1%)");
  }
  if (raw.malformed_lines > 0) spdlog::warn("{}: skipped {} malformed line(s)", path.string(), raw.malformed_lines);
  return raw;
}

RawInteractions deduplicate(const RawInteractions& raw) {
  std::unordered_map<std::string, std::size_t> first_index;
  first_index.reserve(raw.records.size());
  RawInteractions out;
  out.malformed_lines = raw.malformed_lines;
  out.had_header = raw.had_header;
  for (const auto& rec : raw.records) {
    std::string key = rec.user;
    key.push_back('\x1f');
    key += rec.item;
    auto [it, inserted] = first_index.try_emplace(std::move(key), out.records.size());
    if (inserted) {
      out.records.push_back(rec);
      continue;
    }
    auto& kept = out.records[it->second];
    if (rec.timestamp && (!kept.timestamp || *rec.timestamp < *kept.timestamp)) kept.timestamp = rec.timestamp;
  }
  return out;
}

RawInteractions k_core_filter(const RawInteractions& raw, int k_user, int k_item) {
  if (k_user < 1 || k_item < 1) throw UsageError("k-core thresholds must be >= 1");
  RawInteractions dedup = deduplicate(raw);
  const std::size_t n = dedup.records.size();

  Vocab users, items;
  std::vector<std::int32_t> uid(n), iid(n);
  for (std::size_t r = 0; r < n; ++r) {
    uid[r] = users.add(dedup.records[r].user);
    iid[r] = items.add(dedup.records[r].item);
  }
  std::vector<char> alive(n, 1);
  std::vector<std::int64_t> udeg(static_cast<std::size_t>(users.size())), ideg(static_cast<std::size_t>(items.size()));
  bool changed = true;
  while (changed) {
    changed = false;
    std::fill(udeg.begin(), udeg.end(), 0);
    std::fill(ideg.begin(), ideg.end(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      if (!alive[r]) continue;
      ++udeg[static_cast<std::size_t>(uid[r])];
      ++ideg[static_cast<std::size_t>(iid[r])];
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (alive[r] && (udeg[static_cast<std::size_t>(uid[r])] < k_user || ideg[static_cast<std::size_t>(iid[r])] < k_item)) {
        alive[r] = 0;
        changed = true;
      }
    }
  }

  RawInteractions out;
  out.malformed_lines = dedup.malformed_lines;
  out.had_header = dedup.had_header;
  for (std::size_t r = 0; r < n; ++r)
    if (alive[r]) out.records.push_back(dedup.records[r]);
  if (out.records.empty()) throw Error("dataset eliminated by filtering");
  return out;
}

std::int32_t Vocab::add(const std::string& token) {
  auto [it, inserted] = index_.try_emplace(token, static_cast<std::int32_t>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<std::int32_t> Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::int32_t>> InteractionDataset::user_items(const std::vector<Pair>& split) const {
  std::vector<std::vector<std::int32_t>> out(static_cast<std::size_t>(num_users));
  for (const auto& [u, i] : split) out[static_cast<std::size_t>(u)].push_back(i);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

std::vector<std::vector<std::int32_t>> InteractionDataset::item_users(const std::vector<Pair>& split) const {
  std::vector<std::vector<std::int32_t>> out(static_cast<std::size_t>(num_items));
  for (const auto& [u, i] : split) out[static_cast<std::size_t>(i)].push_back(u);
  for (auto& v : out) std::sort(v.begin(), v.end());
  return out;
}

InteractionDataset split_dataset(const RawInteractions& raw, const SplitRatios& ratios, std::uint64_t seed) {
  if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9 || ratios.train <= 0 || ratios.valid < 0 ||
      ratios.test < 0)
    throw UsageError("split ratios must be nonnegative, with positive train share, and sum to 1");

  RawInteractions dedup = deduplicate(raw);
  const auto& recs = dedup.records;
  const bool timed = !recs.empty() && std::all_of(recs.begin(), recs.end(), [](const RawRecord& r) { return r.timestamp.has_value(); });

  Vocab raw_users, raw_items;
  std::vector<std::vector<std::size_t>> per_user;
  std::vector<std::int32_t> rec_item(recs.size());
  for (std::size_t r = 0; r < recs.size(); ++r) {
    std::int32_t u = raw_users.add(recs[r].user);
    rec_item[r] = raw_items.add(recs[r].item);
    if (static_cast<std::size_t>(u) == per_user.size()) per_user.emplace_back();
    per_user[static_cast<std::size_t>(u)].push_back(r);
  }

  enum Part : std::uint8_t { kTrain, kValid, kTest };
  std::vector<Part> part(recs.size(), kTrain);
  for (std::size_t u = 0; u < per_user.size(); ++u) {
    auto& list = per_user[u];
    Rng rng(derive_seed(seed, {0x5b117ULL, u}));
    std::shuffle(list.begin(), list.end(), rng);
    if (timed)
      std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) { return *recs[a].timestamp < *recs[b].timestamp; });
    const auto n = static_cast<std::int64_t>(list.size());
    auto n_valid = static_cast<std::int64_t>(std::floor(ratios.valid * static_cast<double>(n) + 1e-9));
    auto n_test = static_cast<std::int64_t>(std::floor(ratios.test * static_cast<double>(n) + 1e-9));
    while (n_valid + n_test >= n && (n_valid > 0 || n_test > 0)) {
      if (n_test > 0) --n_test;
      else --n_valid;
    }
    const std::int64_t n_train = n - n_valid - n_test;
    for (std::int64_t k = 0; k < n; ++k)
      part[list[static_cast<std::size_t>(k)]] = k < n_train ? kTrain : (k < n_train + n_valid ? kValid : kTest);
  }

  // Re-densify over entities present in train, preserving first-appearance order.
  std::vector<char> user_in_train(static_cast<std::size_t>(raw_users.size()), 0);
  std::vector<char> item_in_train(static_cast<std::size_t>(raw_items.size()), 0);
  for (std::size_t u = 0; u < per_user.size(); ++u)
    for (std::size_t r : per_user[u])
      if (part[r] == kTrain) {
        user_in_train[u] = 1;
        item_in_train[static_cast<std::size_t>(rec_item[r])] = 1;
      }

  InteractionDataset ds;
  ds.ratios = ratios;
  ds.seed = seed;
  std::vector<std::int32_t> user_map(user_in_train.size(), -1), item_map(item_in_train.size(), -1);
  for (std::size_t u = 0; u < user_in_train.size(); ++u)
    if (user_in_train[u]) user_map[u] = ds.user_vocab.add(raw_users.token(static_cast<std::int32_t>(u)));
  for (std::size_t i = 0; i < item_in_train.size(); ++i)
    if (item_in_train[i]) item_map[i] = ds.item_vocab.add(raw_items.token(static_cast<std::int32_t>(i)));
  ds.num_users = ds.user_vocab.size();
  ds.num_items = ds.item_vocab.size();

  for (std::size_t u = 0; u < per_user.size(); ++u) {
    const std::int32_t nu = user_map[u];
    if (nu < 0) continue;
    for (std::size_t r : per_user[u]) {
      const std::int32_t ni = item_map[static_cast<std::size_t>(rec_item[r])];
      if (ni < 0) continue;  // cold item in valid/test
      switch (part[r]) {
        case kTrain: ds.train.emplace_back(nu, ni); break;
        case kValid: ds.valid.emplace_back(nu, ni); break;
        case kTest: ds.test.emplace_back(nu, ni); break;
      }
    }
  }
  std::sort(ds.train.begin(), ds.train.end());
  std::sort(ds.valid.begin(), ds.valid.end());
  std::sort(ds.test.begin(), ds.test.end());
  return ds;
}

void save_dataset(const InteractionDataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json meta;
  meta["format"] = "cogcl-dataset";
  meta["version"] = kDatasetFormatVersion;
  meta["num_users"] = ds.num_users;
  meta["num_items"] = ds.num_items;
  meta["num_train"] = ds.train.size();
  meta["num_valid"] = ds.valid.size();
  meta["num_test"] = ds.test.size();
  meta["ratios"] = {ds.ratios.train, ds.ratios.valid, ds.ratios.test};
  meta["seed"] = ds.seed;
  {
    std::ofstream out(dir / "meta.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
  }
  write_vocab(dir / "vocab_user.tsv", ds.user_vocab);
  write_vocab(dir / "vocab_item.tsv", ds.item_vocab);
  write_pairs(dir / "train.tsv", ds.train);
  write_pairs(dir / "valid.tsv", ds.valid);
  write_pairs(dir / "test.tsv", ds.test);
}

InteractionDataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  std::ifstream in(dir / "meta.json", std::ios::binary);
  if (!in) throw IoError("cannot read " + (dir / "meta.json").string());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("corrupted dataset header " + (dir / "meta.json").string() + ": " + e.what());
  }
  InteractionDataset ds;
  try {
    if (meta.at("format").get<std::string>() != "cogcl-dataset") throw FormatError("meta.json is not a cogcl dataset header");
    const int version = meta.at("version").get<int>();
    if (version != kDatasetFormatVersion)
      throw FormatError("dataset format version " + std::to_string(version) + " is not supported (expected version " +
                        std::to_string(kDatasetFormatVersion) + ")");
    ds.num_users = meta.at("num_users").get<std::int32_t>();
    ds.num_items = meta.at("num_items").get<std::int32_t>();
    auto r = meta.at("ratios").get<std::vector<double>>();
    if (r.size() != 3) throw FormatError("meta.json: ratios must have three entries");
    ds.ratios = {r[0], r[1], r[2]};
    ds.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("corrupted dataset header " + (dir / "meta.json").string() + ": " + e.what());
  }
  ds.user_vocab = read_vocab(dir / "vocab_user.tsv", ds.num_users);
  ds.item_vocab = read_vocab(dir / "vocab_item.tsv", ds.num_items);
  ds.train = read_pairs(dir / "train.tsv", ds.num_users, ds.num_items);
  ds.valid = read_pairs(dir / "valid.tsv", ds.num_users, ds.num_items);
  ds.test = read_pairs(dir / "test.tsv", ds.num_users, ds.num_items);
  if (ds.train.size() != meta.value("num_train", ds.train.size()) || ds.valid.size() != meta.value("num_valid", ds.valid.size()) ||
      ds.test.size() != meta.value("num_test", ds.test.size()))
    throw FormatError("split sizes disagree with meta.json in " + dir.string());
  return ds;
}

DatasetStats dataset_stats(const InteractionDataset& ds) {
  DatasetStats s;
  s.users = ds.num_users;
  s.items = ds.num_items;
  s.interactions = static_cast<std::int64_t>(ds.train.size() + ds.valid.size() + ds.test.size());
  const double cells = static_cast<double>(s.users) * static_cast<double>(s.items);
  s.sparsity = cells > 0 ? 1.0 - static_cast<double>(s.interactions) / cells : 0.0;
  return s;
}

}  // namespace cogcl::data
