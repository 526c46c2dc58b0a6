// Copyright 2026 The metaloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "models/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "common/error.hpp"

namespace metaloop {

namespace {

std::uint64_t to_little(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) {
    return x;
  } else {
    std::uint64_t y = 0;
    for (int i = 0; i < 8; ++i) y |= ((x >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return y;
  }
}

std::string read_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) {
    fail(ErrorKind::data, std::string("MLPS1: truncated header (") + what + ")");
  }
  return line;
}

}  // namespace

void write_tensors(std::ostream& os, const std::vector<NamedTensor>& entries) {
  os << kParamMagic << '\n' << "entries " << entries.size() << '\n';
  std::size_t offset = 0;
  for (const auto& e : entries) {
    if (e.name.empty() || e.name.find_first_of(" \t\r\n") != std::string::npos) {
      fail(ErrorKind::invalid_argument, "MLPS1: invalid entry name '" + e.name + "'");
    }
    os << e.name << ' ' << offset << ' ' << e.value.rank();
    for (std::size_t d : e.value.shape()) os << ' ' << d;
    os << '\n';
    offset += e.value.size() * sizeof(double);
  }
  os << "data " << offset << '\n';
  for (const auto& e : entries) {
    for (double v : e.value.data()) {
      std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
      os.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!os) fail(ErrorKind::io, "MLPS1: write failed");
}

std::vector<NamedTensor> read_tensors(std::istream& is) {
  if (read_line(is, "magic") != kParamMagic) {
    fail(ErrorKind::data, "MLPS1: bad magic string");
  }
  std::istringstream count_line(read_line(is, "entry count"));
  std::string word;
  std::size_t count = 0;
  if (!(count_line >> word >> count) || word != "entries") {
    fail(ErrorKind::data, "MLPS1: malformed entry count");
  }
  struct Manifest {
    std::string name;
    std::size_t offset;
    ad::Shape shape;
  };
  std::vector<Manifest> manifest;
  manifest.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream line(read_line(is, "manifest"));
    Manifest m;
    std::size_t rank = 0;
    if (!(line >> m.name >> m.offset >> rank)) {
      fail(ErrorKind::data, "MLPS1: malformed manifest line " + std::to_string(i));
    }
    m.shape.resize(rank);
    for (auto& d : m.shape) {
      if (!(line >> d)) fail(ErrorKind::data, "MLPS1: malformed shape for " + m.name);
    }
    manifest.push_back(std::move(m));
  }
  std::istringstream data_line(read_line(is, "data size"));
  std::size_t bytes = 0;
  if (!(data_line >> word >> bytes) || word != "data" || bytes % 8 != 0) {
    fail(ErrorKind::data, "MLPS1: malformed data line");
  }
  std::string payload(bytes, '\0');
  is.read(payload.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(is.gcount()) != bytes) {
    fail(ErrorKind::data, "MLPS1: truncated payload");
  }
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (const auto& m : manifest) {
    const std::size_t n = ad::element_count(m.shape);
    if (m.offset % 8 != 0 || m.offset + n * 8 > bytes) {
      fail(ErrorKind::data, "MLPS1: entry " + m.name + " outside payload");
    }
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, payload.data() + m.offset + i * 8, 8);
      values[i] = std::bit_cast<double>(to_little(bits));
    }
    out.push_back({m.name, ad::Tensor::constant(m.shape, std::move(values))});
  }
  return out;
}

void save_tensors(const std::string& path, const std::vector<NamedTensor>& entries) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  write_tensors(os, entries);
}

std::vector<NamedTensor> load_tensors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open '" + path + "'");
  return read_tensors(is);
}

}  // namespace metaloop
