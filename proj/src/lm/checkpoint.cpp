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

#include "sidrec/lm/checkpoint.hpp"

#include <fstream>
#include <map>

#include "sidrec/common/binary_io.hpp"
#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

constexpr char kMagic[] = "PLUMLM01";
constexpr std::uint32_t kVersion = 1;
constexpr char kArchBlock[] = "meta.arch";

}  // namespace

void save_lm(const std::string& path, const SequenceModel<float>& model, const VocabSpec& vocab) {
  const Vocabulary v(vocab);
  if (v.size() != model.vocab_size) {
    fail(ErrorKind::kDimension, "vocabulary has " + std::to_string(v.size()) + " tokens, model has " +
                                    std::to_string(model.vocab_size));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write model checkpoint " + path);
  binio::write_magic(out, kMagic);
  binio::write_u32(out, kVersion);
  binio::write_u32(out, static_cast<std::uint32_t>(v.ranges().size()));
  for (const auto& r : v.ranges()) {
    binio::write_u16(out, static_cast<std::uint16_t>(r.name.size()));
    out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    binio::write_u32(out, r.begin);
    binio::write_u32(out, r.size);
  }
  const auto& d = model.dims;
  binio::write_block(out, kArchBlock,
                     Tensor<float>(Shape{5}, {static_cast<float>(d.layers), static_cast<float>(d.dim),
                                              static_cast<float>(d.heads), static_cast<float>(d.ff),
                                              static_cast<float>(d.max_len)}));
  for (const auto* p : model.parameters()) binio::write_block(out, p->name, p->value);
  if (!out) fail(ErrorKind::kIo, "failed writing model checkpoint " + path);
}

LmCheckpoint load_lm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open model checkpoint " + path);
  binio::expect_magic(in, kMagic, "model checkpoint " + path);
  const std::uint32_t version = binio::read_u32(in);
  if (version != kVersion) {
    fail(ErrorKind::kData, "model checkpoint " + path + " has version " + std::to_string(version));
  }
  const std::uint32_t range_count = binio::read_u32(in);
  if (range_count > 64) fail(ErrorKind::kData, "model checkpoint " + path + " has a corrupt vocabulary manifest");
  std::vector<Vocabulary::Range> ranges(range_count);
  for (auto& r : ranges) {
    r.name.resize(binio::read_u16(in));
    in.read(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    r.begin = binio::read_u32(in);
    r.size = binio::read_u32(in);
  }
  if (!in) fail(ErrorKind::kData, "model checkpoint " + path + " is truncated");

  LmCheckpoint ck;
  ck.vocab = Vocabulary::spec_from_ranges(ranges);

  std::string name;
  Tensor<float> t;
  if (!binio::read_block(in, name, t) || name != kArchBlock || t.size() != 5) {
    fail(ErrorKind::kData, "model checkpoint " + path + " lacks its architecture block");
  }
  ModelDims dims;
  dims.layers = static_cast<std::size_t>(t.data[0]);
  dims.dim = static_cast<std::size_t>(t.data[1]);
  dims.heads = static_cast<std::size_t>(t.data[2]);
  dims.ff = static_cast<std::size_t>(t.data[3]);
  dims.max_len = static_cast<std::size_t>(t.data[4]);
  dims.validate();

  std::map<std::string, Tensor<float>> blocks;
  while (binio::read_block(in, name, t)) {
    if (!blocks.emplace(name, std::move(t)).second) {
      fail(ErrorKind::kData, "model checkpoint repeats block '" + name + "'");
    }
  }
  // A freshly initialized model supplies the expected names and shapes.
  ck.model = SequenceModel<float>(dims, Vocabulary(ck.vocab).size(), 0);
  for (auto* p : ck.model.parameters()) {
    auto it = blocks.find(p->name);
    if (it == blocks.end()) fail(ErrorKind::kData, "model checkpoint is missing block '" + p->name + "'");
    if (it->second.shape != p->value.shape) {
      fail(ErrorKind::kDimension, "model checkpoint block '" + p->name + "' has shape " +
                                      shape_string(it->second.shape) + ", expected " + shape_string(p->value.shape));
    }
    *p = Parameter<float>(p->name, std::move(it->second));
    blocks.erase(it);
  }
  if (!blocks.empty()) fail(ErrorKind::kData, "model checkpoint has unexpected block '" + blocks.begin()->first + "'");
  return ck;
}

}  // namespace sidrec
