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

#include "sidrec/quantizer/checkpoint.hpp"

#include <fstream>
#include <map>

#include "sidrec/common/binary_io.hpp"
#include "sidrec/common/error.hpp"

namespace sidrec {
namespace {

constexpr char kMagic[] = "PLUMQ001";

Parameter<float> take(std::map<std::string, Tensor<float>>& blocks, const std::string& name, std::size_t rank) {
  auto it = blocks.find(name);
  if (it == blocks.end()) fail(ErrorKind::kData, "quantizer checkpoint is missing block '" + name + "'");
  if (it->second.rank() != rank) {
    fail(ErrorKind::kDimension, "quantizer checkpoint block '" + name + "' has shape " +
                                    shape_string(it->second.shape));
  }
  Parameter<float> p(name, std::move(it->second));
  blocks.erase(it);
  return p;
}

Mlp<float> take_mlp(std::map<std::string, Tensor<float>>& blocks, const std::string& prefix) {
  return {take(blocks, prefix + ".w1", 2), take(blocks, prefix + ".b1", 1), take(blocks, prefix + ".w2", 2),
          take(blocks, prefix + ".b2", 1)};
}

}  // namespace

void save_quantizer(const std::string& path, const RqVaeModel<float>& model) {
  model.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write quantizer checkpoint " + path);
  binio::write_magic(out, kMagic);
  binio::write_u32(out, static_cast<std::uint32_t>(model.modalities()));
  binio::write_u32(out, static_cast<std::uint32_t>(model.dims.latent));
  binio::write_u32(out, static_cast<std::uint32_t>(model.spec.levels));
  binio::write_u32(out, static_cast<std::uint32_t>(model.spec.base_cardinality));
  for (const auto* p : model.parameters()) binio::write_block(out, p->name, p->value);
  if (!out) fail(ErrorKind::kIo, "failed writing quantizer checkpoint " + path);
}

RqVaeModel<float> load_quantizer(const std::string& path, SidSpec spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open quantizer checkpoint " + path);
  binio::expect_magic(in, kMagic, "quantizer checkpoint " + path);
  const std::uint32_t modalities = binio::read_u32(in);
  const std::uint32_t latent = binio::read_u32(in);
  spec.levels = static_cast<int>(binio::read_u32(in));
  spec.base_cardinality = static_cast<int>(binio::read_u32(in));
  if (modalities == 0 || latent == 0 || spec.levels < 1) {
    fail(ErrorKind::kData, "quantizer checkpoint " + path + " has an empty header field");
  }

  std::map<std::string, Tensor<float>> blocks;
  std::string name;
  Tensor<float> t;
  while (binio::read_block(in, name, t)) {
    if (!blocks.emplace(name, std::move(t)).second) {
      fail(ErrorKind::kData, "quantizer checkpoint repeats block '" + name + "'");
    }
  }

  RqVaeModel<float> model;
  for (std::uint32_t m = 0; m < modalities; ++m) {
    model.encoders.push_back(take_mlp(blocks, "encoder." + std::to_string(m)));
  }
  model.fusion_w = take(blocks, "fusion.w", 2);
  model.fusion_b = take(blocks, "fusion.b", 1);
  for (std::uint32_t m = 0; m < modalities; ++m) {
    model.decoders.push_back(take_mlp(blocks, "decoder." + std::to_string(m)));
  }
  for (int l = 0; l < spec.levels; ++l) model.codebooks.push_back(take(blocks, "codebook." + std::to_string(l), 2));
  if (!blocks.empty()) fail(ErrorKind::kData, "quantizer checkpoint has unexpected block '" + blocks.begin()->first + "'");

  // The schedule is implied by the codebook heights: only multi_resolution
  // starts at the base size once there is more than one level.
  spec.schedule = model.codebooks[0].value.rows() == static_cast<std::size_t>(spec.base_cardinality)
                      ? CardinalitySchedule::kMultiResolution
                      : CardinalitySchedule::kUniform;
  spec.validate();
  model.spec = spec;
  model.dims.latent = latent;
  model.dims.modality_dims.clear();
  for (const auto& e : model.encoders) model.dims.modality_dims.push_back(e.w1.value.shape[0]);
  model.dims.hidden = model.encoders[0].w1.value.shape[1];
  model.dims.modality_latent = model.encoders[0].w2.value.shape[1];
  model.validate();
  return model;
}

}  // namespace sidrec
