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

#include "cogcl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace cogcl {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename U>
  void pod(U v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(U));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void matrix(const Mat<float>& m) { bytes(m.data(), sizeof(float) * static_cast<std::size_t>(m.size())); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string where) : in_(in), where_(std::move(where)) {}
  template <typename U>
  U pod() {
    U v{};
    bytes(&v, sizeof(U));
    return v;
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("truncated checkpoint " + where_);
  }
  Mat<float> matrix(std::uint64_t rows, std::uint64_t cols) {
    Mat<float> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    bytes(m.data(), sizeof(float) * static_cast<std::size_t>(m.size()));
    return m;
  }

 private:
  std::istream& in_;
  std::string where_;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const compute::ParameterStore<float>& store,
                      const nlohmann::json& meta) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    Writer w(out);
    w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
    w.pod<std::uint32_t>(kCheckpointVersion);
    const std::string m = meta.dump();
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(m.size()));
    w.bytes(m.data(), m.size());
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(store.entries().size()));
    for (const auto& e : store.entries()) {
      w.pod<std::uint32_t>(static_cast<std::uint32_t>(e.name.size()));
      w.bytes(e.name.data(), e.name.size());
      w.pod<std::uint64_t>(static_cast<std::uint64_t>(e.value.rows()));
      w.pod<std::uint64_t>(static_cast<std::uint64_t>(e.value.cols()));
      w.pod<std::int64_t>(e.step);
      w.matrix(e.value);
      w.matrix(e.adam_m);
      w.matrix(e.adam_v);
    }
    if (!out) throw IoError("write failure on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint not found: " + path.string());
  Reader r(in, path.string());
  char magic[sizeof(kCheckpointMagic)];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw FormatError(path.string() + " is not a cogcl checkpoint");
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected version " +
                      std::to_string(kCheckpointVersion) + ")");
  Checkpoint ck;
  std::string m(r.pod<std::uint32_t>(), '\0');
  r.bytes(m.data(), m.size());
  try {
    ck.meta = nlohmann::json::parse(m);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("corrupted checkpoint metadata in " + path.string() + ": " + e.what());
  }
  const auto n = r.pod<std::uint32_t>();
  for (std::uint32_t k = 0; k < n; ++k) {
    std::string name(r.pod<std::uint32_t>(), '\0');
    r.bytes(name.data(), name.size());
    const auto rows = r.pod<std::uint64_t>();
    const auto cols = r.pod<std::uint64_t>();
    if (rows > (1ULL << 32) || cols > (1ULL << 20)) throw FormatError("implausible tensor shape in " + path.string());
    const auto step = r.pod<std::int64_t>();
    auto& e = ck.store.add(name, r.matrix(rows, cols));
    e.adam_m = r.matrix(rows, cols);
    e.adam_v = r.matrix(rows, cols);
    e.step = step;
  }
  return ck;
}

}  // namespace cogcl
