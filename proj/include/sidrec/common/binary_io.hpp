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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sidrec/numerics/tensor.hpp"

// Little-endian primitives and the named parameter block shared by the
// quantizer and sequence-model checkpoints:
//   u16 name length, name bytes, u32 rank, u32 extents..., f32 data.
namespace sidrec::binio {

void write_u16(std::ostream& out, std::uint16_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_magic(std::ostream& out, std::string_view magic);

std::uint16_t read_u16(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
// Throws a data error when the next bytes differ from `magic`.
void expect_magic(std::istream& in, std::string_view magic, const std::string& what);

void write_block(std::ostream& out, const std::string& name, const Tensor<float>& t);
// Returns false at clean end of stream.
bool read_block(std::istream& in, std::string& name, Tensor<float>& t);

}  // namespace sidrec::binio
