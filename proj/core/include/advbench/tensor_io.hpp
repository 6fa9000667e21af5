#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "advbench/tensor.hpp"

namespace advbench {

// Raised for malformed tensor/model/dataset files. Carries the byte offset
// at which the problem was detected.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& message, std::uint64_t offset);
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

// Tensor file format "ATNS" (little-endian throughout):
//   magic "ATNS" | version u32 = 1 | rank u32 | dims u32 each | data f32,
// row-major. In-memory tensors are double; the file stores 32-bit floats.
void tensor_save(const Tensor& t, const std::string& path);
Tensor tensor_load(const std::string& path);

// In-memory equivalents, used for fingerprints and tests.
std::string tensor_to_bytes(const Tensor& t);
Tensor tensor_from_bytes(const std::string& bytes);

// Round-trips every element through float. Metric rows are computed on
// tensors quantized this way so that rows recomputed from dumped files
// agree exactly with the original run.
Tensor quantize_f32(const Tensor& t);

// FNV-1a 64-bit hash, used for model fingerprints and pinned-data checks.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string hex64(std::uint64_t value);

}  // namespace advbench
