// Copyright 2026 The sidrec Authors.
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

#include "sidrec/common/binary_io.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "sidrec/common/error.hpp"

namespace sidrec::binio {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) fail(ErrorKind::kData, "truncated binary file");
  return v;
}

}  // namespace

void write_u16(std::ostream& out, std::uint16_t v) { put(out, v); }
void write_u32(std::ostream& out, std::uint32_t v) { put(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { put(out, v); }
void write_f32(std::ostream& out, float v) { put(out, v); }
void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

std::uint16_t read_u16(std::istream& in) { return get<std::uint16_t>(in); }
std::uint32_t read_u32(std::istream& in) { return get<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return get<std::uint64_t>(in); }
float read_f32(std::istream& in) { return get<float>(in); }

void expect_magic(std::istream& in, std::string_view magic, const std::string& what) {
  std::string buf(magic.size(), '\0');
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!in || buf != magic) {
    fail(ErrorKind::kData, what + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

void write_block(std::ostream& out, const std::string& name, const Tensor<float>& t) {
  write_u16(out, static_cast<std::uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto e : t.shape) write_u32(out, static_cast<std::uint32_t>(e));
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

bool read_block(std::istream& in, std::string& name, Tensor<float>& t) {
  std::uint16_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (in.gcount() == 0 && in.eof()) return false;
  if (!in) fail(ErrorKind::kData, "truncated parameter block header");
  name.assign(len, '\0');
  in.read(name.data(), len);
  const std::uint32_t rank = read_u32(in);
  Shape shape(rank);
  for (auto& e : shape) e = read_u32(in);
  std::vector<float> data(shape_size(shape));
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!in) fail(ErrorKind::kData, "truncated parameter block '" + name + "'");
  t = Tensor<float>(std::move(shape), std::move(data));
  return true;
}

}  // namespace sidrec::binio
