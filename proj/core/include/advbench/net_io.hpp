#pragma once

#include <string>

#include "advbench/net.hpp"

namespace advbench {

// Model file format "ADNM" (little-endian throughout):
//   magic "ADNM" | version u32 = 1
//   | in_channels u32 | in_height u32 | in_width u32 | num_classes u32
//   | inference_temperature f32
//   | layer_count u32
//   | per layer: kind u8, width u32 (Conv3x3: out channels, Dense: out
//     width, otherwise 0), then for parametric layers the weight and bias
//     tensors in ATNS encoding.
// Serialization is canonical: loading a file and saving it again reproduces
// the bytes exactly.
void model_save(const Model& model, const std::string& path);
Model model_load(const std::string& path);

std::string model_to_bytes(const Model& model);
Model model_from_bytes(const std::string& bytes);

// FNV-1a hash of the canonical serialization, as a 16-digit hex string.
std::string model_fingerprint(const Model& model);

}  // namespace advbench
