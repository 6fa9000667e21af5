#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "advbench/tensor.hpp"

namespace advbench {

// Deterministic synthetic 4-class shape dataset (disk, square, cross,
// stripes) of 1x28x28 images in [0,1]. Stands in for an external image
// corpus so the whole benchmark is reproducible from a single seed.
struct Dataset {
  Tensor images;            // [N, 1, 28, 28]
  std::vector<int> labels;  // values in [0, num_classes)
  int num_classes = 4;

  std::size_t size() const { return labels.size(); }
};

inline constexpr std::size_t kImageChannels = 1;
inline constexpr std::size_t kImageHeight = 28;
inline constexpr std::size_t kImageWidth = 28;
inline constexpr int kNumClasses = 4;

// Generates n samples, classes assigned round-robin so per-class counts
// differ by at most one. Sample i draws from SplitMix64(seed).fork(i), so
// the dataset is a pure function of (seed, n) and samples could be produced
// in parallel without changing bytes. Requires n >= 4.
Dataset generate(std::uint64_t seed, std::size_t n);

// Copy of image i as a [1, 28, 28] tensor.
Tensor image_at(const Dataset& ds, std::size_t i);

// Deterministic split: even indices train, odd indices test.
Dataset train_split(const Dataset& ds);
Dataset test_split(const Dataset& ds);

// Images as one ATNS tensor file plus a label sidecar:
//   count u32 LE | count x u32 LE.
// Loading validates that the sidecar count matches the image tensor's
// leading dimension and that every label is below num_classes.
void dataset_save(const Dataset& ds, const std::string& images_path,
                  const std::string& labels_path);
Dataset dataset_load(const std::string& images_path,
                     const std::string& labels_path);

}  // namespace advbench
