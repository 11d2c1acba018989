// Copyright 2026 The tailscope Authors
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

#include "tailscope/ensemble_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "tailscope/error.hpp"
#include "tailscope/numfmt.hpp"

namespace tailscope {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'E', 'M'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_unsigned_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw Error(ErrorCode::kIo, "ensemble: truncated binary file");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
  }
  return v;
}

void finish(EnsembleMatrix& e) {
  e.censored.assign(e.n_runs, 0);
  e.censored_count = 0;
  for (int r = 0; r < e.n_runs; ++r) {
    for (int c = 0; c < e.dim; ++c) {
      if (!std::isfinite(e.data[std::size_t(r) * e.dim + c])) {
        e.censored[r] = 1;
        ++e.censored_count;
        break;
      }
    }
  }
}

}  // namespace

void write_ensemble_csv(const EnsembleMatrix& e, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
  for (int c = 0; c < e.dim; ++c) os << (c ? ",x" : "x") << c;
  os << '\n';
  for (int r = 0; r < e.n_runs; ++r) {
    for (int c = 0; c < e.dim; ++c) {
      if (c) os << ',';
      os << format_double(e.data[std::size_t(r) * e.dim + c]);
    }
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::kIo, "write failed: " + path);
}

EnsembleMatrix read_ensemble_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open: " + path);
  EnsembleMatrix e;
  std::string line;
  if (!std::getline(is, line)) {
    throw Error(ErrorCode::kIo, "ensemble csv: empty file " + path);
  }
  e.dim = 1;
  for (char ch : line) e.dim += ch == ',';
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int cols = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = line.find(',', pos);
      const std::string_view tok(line.data() + pos,
                                 (next == std::string::npos ? line.size()
                                                            : next) -
                                     pos);
      try {
        e.data.push_back(parse_double(tok));
      } catch (const Error&) {
        throw Error(ErrorCode::kIo, "ensemble csv: bad number on line " +
                                        std::to_string(lineno));
      }
      ++cols;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (cols != e.dim) {
      throw Error(ErrorCode::kIo, "ensemble csv: wrong column count on line " +
                                      std::to_string(lineno));
    }
    ++e.n_runs;
  }
  finish(e);
  return e;
}

void write_ensemble_binary(const EnsembleMatrix& e, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::kIo, "cannot open for writing: " + path);
  os.write(kMagic, 4);
  put_le<std::uint16_t>(os, kVersion);
  put_le<std::uint16_t>(os, 0);
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(e.n_runs));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(e.dim));
  for (double v : e.data) put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw Error(ErrorCode::kIo, "write failed: " + path);
}

EnsembleMatrix read_ensemble_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open: " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kIo, "ensemble binary: bad magic in " + path);
  }
  const auto version = get_le<std::uint16_t>(is);
  if (version != kVersion) {
    throw Error(ErrorCode::kIo, "ensemble binary: unsupported version " +
                                    std::to_string(version));
  }
  (void)get_le<std::uint16_t>(is);
  const auto rows = get_le<std::uint64_t>(is);
  const auto cols = get_le<std::uint64_t>(is);
  if (rows > static_cast<std::uint64_t>(std::numeric_limits<int>::max()) ||
      cols > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw Error(ErrorCode::kIo, "ensemble binary: dimensions too large");
  }
  EnsembleMatrix e;
  e.n_runs = static_cast<int>(rows);
  e.dim = static_cast<int>(cols);
  e.data.resize(rows * cols);
  for (double& v : e.data) v = std::bit_cast<double>(get_le<std::uint64_t>(is));
  finish(e);
  return e;
}

EnsembleMatrix read_ensemble(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (is.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) {
    return read_ensemble_binary(path);
  }
  return read_ensemble_csv(path);
}

}  // namespace tailscope
