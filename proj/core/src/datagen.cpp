#include "advbench/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "advbench/rng.hpp"
#include "advbench/tensor_io.hpp"

namespace advbench {

namespace {

// Shape classes, in label order.
enum ShapeClass : int { kDisk = 0, kSquare = 1, kCross = 2, kStripes = 3 };

// Renders one sample into img (28x28, already holding the background).
// half is the shape's half-extent in pixels.
void render_shape(std::vector<double>& img, int label, int cx, int cy, int half,
                  double fg) {
  auto put = [&](int y, int x) {
    if (y >= 0 && y < static_cast<int>(kImageHeight) && x >= 0 &&
        x < static_cast<int>(kImageWidth))
      img[static_cast<std::size_t>(y) * kImageWidth + static_cast<std::size_t>(x)] = fg;
  };
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      bool on = false;
      switch (label) {
        case kDisk:
          on = dx * dx + dy * dy <= half * half;
          break;
        case kSquare:
          on = true;
          break;
        case kCross:
          on = dx == 0 || dy == 0;
          break;
        case kStripes:
          on = ((dy + half) % 2) == 0;
          break;
      }
      if (on) put(cy + dy, cx + dx);
    }
  }
}

}  // namespace

Dataset generate(std::uint64_t seed, std::size_t n) {
  if (n < 4) throw std::invalid_argument("generate: n must be at least 4");
  Dataset ds;
  ds.num_classes = kNumClasses;
  ds.images = Tensor({n, kImageChannels, kImageHeight, kImageWidth});
  ds.labels.resize(n);

  SplitMix64 root(seed);
  const std::size_t px = kImageHeight * kImageWidth;
  // Balanced cyclic class assignment. A plain i % 4 would hand all of
  // classes {0,2} to even indices and {1,3} to odd ones, making the parity
  // train/test split degenerate; this period-8 cycle keeps every prefix
  // balanced (counts differ by at most 1) and gives both parities every
  // class equally.
  static constexpr int kClassCycle[8] = {0, 2, 1, 3, 2, 0, 3, 1};
  for (std::size_t i = 0; i < n; ++i) {
    SplitMix64 rng = root.fork(i);
    int label = kClassCycle[i % 8];
    ds.labels[i] = label;

    // size in [6,10] px; the center jitters inside a wide margin around the
    // middle, which keeps shapes fully inside the frame at every size.
    int size = 6 + static_cast<int>(rng.next_below(5));
    int half = size / 2;
    int lo = 10, hi = 17;
    int cy = lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    int cx = lo + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    double fg = rng.uniform(0.6, 1.0);
    double bg = rng.uniform(0.0, 0.2);

    std::vector<double> img(px, bg);
    render_shape(img, label, cx, cy, half, fg);
    double* dst = ds.images.data() + i * px;
    for (std::size_t p = 0; p < px; ++p) {
      double v = img[p] + rng.uniform(-0.05, 0.05);
      dst[p] = std::min(1.0, std::max(0.0, v));
    }
  }
  return ds;
}

Tensor image_at(const Dataset& ds, std::size_t i) {
  if (i >= ds.size()) throw std::invalid_argument("image_at: index out of range");
  const std::size_t px = kImageChannels * kImageHeight * kImageWidth;
  std::vector<double> data(ds.images.data() + i * px, ds.images.data() + (i + 1) * px);
  return Tensor({kImageChannels, kImageHeight, kImageWidth}, std::move(data));
}

namespace {

Dataset take_indices(const Dataset& ds, std::size_t first, std::size_t step) {
  Dataset out;
  out.num_classes = ds.num_classes;
  const std::size_t px = kImageChannels * kImageHeight * kImageWidth;
  std::vector<double> data;
  for (std::size_t i = first; i < ds.size(); i += step) {
    data.insert(data.end(), ds.images.data() + i * px, ds.images.data() + (i + 1) * px);
    out.labels.push_back(ds.labels[i]);
  }
  out.images = Tensor({out.labels.size(), kImageChannels, kImageHeight, kImageWidth},
                      std::move(data));
  return out;
}

}  // namespace

Dataset train_split(const Dataset& ds) { return take_indices(ds, 0, 2); }
Dataset test_split(const Dataset& ds) { return take_indices(ds, 1, 2); }

void dataset_save(const Dataset& ds, const std::string& images_path,
                  const std::string& labels_path) {
  tensor_save(ds.images, images_path);
  std::string bytes;
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(static_cast<std::uint32_t>(ds.labels.size()));
  for (int label : ds.labels) put_u32(static_cast<std::uint32_t>(label));
  std::ofstream out(labels_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("dataset_save: cannot open " + labels_path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("dataset_save: write failed for " + labels_path);
}

Dataset dataset_load(const std::string& images_path,
                     const std::string& labels_path) {
  Dataset ds;
  ds.images = tensor_load(images_path);
  if (ds.images.rank() != 4)
    throw FormatError("dataset image tensor must be rank 4", 0);

  std::ifstream in(labels_path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset_load: cannot open " + labels_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();

  std::size_t pos = 0;
  auto get_u32 = [&](const char* what) {
    if (bytes.size() - pos < 4)
      throw FormatError(std::string("truncated label file reading ") + what, pos);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
  };
  std::uint32_t count = get_u32("count");
  if (count != ds.images.shape()[0])
    throw FormatError("label count does not match image count", 0);
  ds.num_classes = kNumClasses;
  ds.labels.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint32_t label = get_u32("label");
    if (label >= static_cast<std::uint32_t>(ds.num_classes))
      throw FormatError("label value " + std::to_string(label) +
                            " out of range for " + std::to_string(ds.num_classes) +
                            " classes",
                        pos - 4);
    ds.labels.push_back(static_cast<int>(label));
  }
  if (pos != bytes.size())
    throw FormatError("trailing bytes in label file", pos);
  return ds;
}

}  // namespace advbench
