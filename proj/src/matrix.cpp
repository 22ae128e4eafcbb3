// Copyright 2026 The IBSC Authors
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

#include "ibsc/matrix.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "ibsc/errors.hpp"

namespace ibsc {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) {
      throw ValidationError("ragged row " + std::to_string(r) + ": expected " +
                            std::to_string(m.cols_) + " values, got " +
                            std::to_string(rows[r].size()));
    }
    std::memcpy(m.data_.data() + r * m.cols_, rows[r].data(), m.cols_ * sizeof(double));
  }
  return m;
}

namespace {

constexpr char kMagic[4] = {'I', 'B', 'S', 'C'};
constexpr unsigned char kVersion = 0x01;

std::uint32_t read_u32le(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw ValidationError("truncated header in " + path);
  }
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

void write_u32le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

float f32_from_le(const unsigned char b[4]) {
  std::uint32_t u = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
                    std::uint32_t(b[3]) << 24;
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void f32_to_le(float f, unsigned char b[4]) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  b[0] = static_cast<unsigned char>(u & 0xff);
  b[1] = static_cast<unsigned char>((u >> 8) & 0xff);
  b[2] = static_cast<unsigned char>((u >> 16) & 0xff);
  b[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

}  // namespace

Matrix load_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ValidationError("bad magic in " + path + ": expected IBSC");
  }
  char version;
  if (!in.read(&version, 1) || static_cast<unsigned char>(version) != kVersion) {
    throw ValidationError("unsupported container version in " + path);
  }
  const std::uint32_t rows = read_u32le(in, path);
  const std::uint32_t cols = read_u32le(in, path);
  if (rows == 0 || cols == 0) {
    throw ValidationError("empty matrix (rows=" + std::to_string(rows) +
                          ", cols=" + std::to_string(cols) + ") in " + path);
  }

  Matrix m(rows, cols);
  std::vector<unsigned char> buf(std::size_t(cols) * 4);
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw ValidationError("truncated payload in " + path + " at row " + std::to_string(r));
    }
    for (std::uint32_t c = 0; c < cols; ++c) {
      m(r, c) = static_cast<double>(f32_from_le(buf.data() + std::size_t(c) * 4));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ValidationError("trailing bytes after payload in " + path);
  }
  return m;
}

void save_matrix_binary(const std::string& path, const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ValidationError("refusing to write empty matrix to " + path);
  }
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("matrix too large for container: " + path);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");

  out.write(kMagic, 4);
  const char version = static_cast<char>(kVersion);
  out.write(&version, 1);
  write_u32le(out, static_cast<std::uint32_t>(m.rows()));
  write_u32le(out, static_cast<std::uint32_t>(m.cols()));

  std::vector<unsigned char> buf(m.cols() * 4);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      f32_to_le(static_cast<float>(m(r, c)), buf.data() + c * 4);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw ValidationError("write failed for " + path);
}

double squared_l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_l2_distance(a, b));
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

}  // namespace ibsc
