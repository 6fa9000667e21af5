#include "advbench/net_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "advbench/tensor_io.hpp"

namespace advbench {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'N', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32(const std::string& b, std::size_t& pos, const char* what) {
  if (b.size() - pos < 4)
    throw FormatError(std::string("truncated model file reading ") + what, pos);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

std::size_t layer_width(const Layer& layer) {
  return layer.has_params() ? layer.weight.shape()[0] : 0;
}

}  // namespace

std::string model_to_bytes(const Model& model) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(model.in_channels));
  put_u32(out, static_cast<std::uint32_t>(model.in_height));
  put_u32(out, static_cast<std::uint32_t>(model.in_width));
  put_u32(out, static_cast<std::uint32_t>(model.num_classes));
  put_u32(out, std::bit_cast<std::uint32_t>(
                   static_cast<float>(model.inference_temperature)));
  put_u32(out, static_cast<std::uint32_t>(model.layers.size()));
  for (const Layer& layer : model.layers) {
    out.push_back(static_cast<char>(layer.kind));
    put_u32(out, static_cast<std::uint32_t>(layer_width(layer)));
    if (layer.has_params()) {
      out += tensor_to_bytes(layer.weight);
      out += tensor_to_bytes(layer.bias);
    }
  }
  return out;
}

Model model_from_bytes(const std::string& bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad magic for model file", 0);
  pos += 4;
  std::uint32_t version = read_u32(bytes, pos, "version");
  if (version != kVersion)
    throw FormatError("unsupported model format version", pos - 4);

  Model model;
  model.in_channels = read_u32(bytes, pos, "in_channels");
  model.in_height = read_u32(bytes, pos, "in_height");
  model.in_width = read_u32(bytes, pos, "in_width");
  model.num_classes = read_u32(bytes, pos, "num_classes");
  model.inference_temperature = static_cast<double>(
      std::bit_cast<float>(read_u32(bytes, pos, "inference_temperature")));
  if (model.inference_temperature <= 0.0)
    throw FormatError("non-positive inference temperature", pos - 4);
  std::uint32_t layer_count = read_u32(bytes, pos, "layer_count");
  if (layer_count == 0 || layer_count > 1024)
    throw FormatError("layer count out of range", pos - 4);

  for (std::uint32_t l = 0; l < layer_count; ++l) {
    if (bytes.size() - pos < 1)
      throw FormatError("truncated model file reading layer kind", pos);
    auto kind_raw = static_cast<std::uint8_t>(bytes[pos++]);
    if (kind_raw > static_cast<std::uint8_t>(LayerKind::Dense))
      throw FormatError("unknown layer kind " + std::to_string(kind_raw), pos - 1);
    Layer layer;
    layer.kind = static_cast<LayerKind>(kind_raw);
    std::uint32_t width = read_u32(bytes, pos, "layer width");
    if (layer.has_params()) {
      if (width == 0) throw FormatError("parametric layer with zero width", pos - 4);
      // Embedded tensors carry their own headers; measure each one's byte
      // length from its header before handing the slice to the tensor parser.
      for (Tensor* t : {&layer.weight, &layer.bias}) {
        std::size_t p2 = pos;
        if (bytes.size() - p2 < 12)
          throw FormatError("truncated tensor inside model file", p2);
        if (std::memcmp(bytes.data() + p2, "ATNS", 4) != 0)
          throw FormatError("bad tensor magic inside model file", p2);
        p2 += 4;
        std::uint32_t tversion = read_u32(bytes, p2, "tensor version");
        if (tversion != 1)
          throw FormatError("unsupported tensor version inside model file", p2 - 4);
        std::uint32_t rank = read_u32(bytes, p2, "tensor rank");
        if (rank == 0 || rank > 16)
          throw FormatError("tensor rank out of range inside model file", p2 - 4);
        std::uint64_t count = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
          std::uint32_t dim = read_u32(bytes, p2, "tensor dimension");
          if (dim == 0) throw FormatError("zero tensor dimension", p2 - 4);
          count *= dim;
          if (count > (1ULL << 40))
            throw FormatError("tensor dimensions overflow", p2 - 4);
        }
        std::size_t total = (p2 - pos) + 4 * static_cast<std::size_t>(count);
        if (bytes.size() - pos < total)
          throw FormatError("truncated tensor data inside model file", bytes.size());
        *t = tensor_from_bytes(bytes.substr(pos, total));
        pos += total;
      }
      if (layer.weight.shape()[0] != width)
        throw FormatError("layer width disagrees with weight shape", pos);
    }
    model.layers.push_back(std::move(layer));
  }
  if (pos != bytes.size())
    throw FormatError("trailing bytes after model data", pos);
  if (model.layers.back().kind != LayerKind::Dense ||
      model.layers.back().weight.shape()[0] != model.num_classes)
    throw FormatError("model num_classes disagrees with final layer", pos);
  return model;
}

void model_save(const Model& model, const std::string& path) {
  std::string bytes = model_to_bytes(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("model_save: cannot open " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("model_save: write failed for " + path);
}

Model model_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("model_load: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_bytes(buf.str());
}

std::string model_fingerprint(const Model& model) {
  std::string bytes = model_to_bytes(model);
  return hex64(fnv1a64(bytes.data(), bytes.size()));
}

}  // namespace advbench
