#include "advbench/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace advbench {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'N', 'S'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::uint64_t base_offset = 0)
      : bytes_(bytes), base_(base_offset) {}

  std::uint64_t offset() const { return base_ + pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void expect_magic(const char magic[4], const char* what) {
    if (remaining() < 4)
      throw FormatError(std::string("truncated ") + what + " header", offset());
    if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0)
      throw FormatError(std::string("bad magic for ") + what, offset());
    pos_ += 4;
  }

  std::uint32_t get_u32(const char* what) {
    if (remaining() < 4)
      throw FormatError(std::string("truncated file reading ") + what, offset());
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  float get_f32(const char* what) {
    return std::bit_cast<float>(get_u32(what));
  }

  std::uint8_t get_u8(const char* what) {
    if (remaining() < 1)
      throw FormatError(std::string("truncated file reading ") + what, offset());
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& bytes_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

Tensor read_tensor(ByteReader& r) {
  r.expect_magic(kMagic, "tensor");
  std::uint32_t version = r.get_u32("version");
  if (version != kVersion)
    throw FormatError("unsupported tensor format version", r.offset() - 4);
  std::uint32_t rank = r.get_u32("rank");
  if (rank == 0 || rank > 16)
    throw FormatError("tensor rank out of range", r.offset() - 4);
  std::vector<std::size_t> shape(rank);
  std::size_t count = 1;
  for (std::uint32_t d = 0; d < rank; ++d) {
    std::uint32_t dim = r.get_u32("dimension");
    if (dim == 0) throw FormatError("zero tensor dimension", r.offset() - 4);
    if (count > std::numeric_limits<std::size_t>::max() / dim)
      throw FormatError("tensor dimensions overflow", r.offset() - 4);
    shape[d] = dim;
    count *= dim;
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = static_cast<double>(r.get_f32("tensor data"));
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

FormatError::FormatError(const std::string& message, std::uint64_t offset)
    : std::runtime_error(message + " (at byte offset " +
                         std::to_string(offset) + ")"),
      offset_(offset) {}

std::string tensor_to_bytes(const Tensor& t) {
  if (t.rank() == 0)
    throw std::invalid_argument("tensor_save: cannot serialize an empty-shape tensor");
  if (t.rank() > 16)
    throw std::invalid_argument("tensor_save: rank exceeds format limit of 16");
  std::string out;
  out.reserve(12 + 4 * t.rank() + 4 * t.size());
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t dim : t.shape()) {
    if (dim > std::numeric_limits<std::uint32_t>::max())
      throw std::invalid_argument("tensor_save: dimension exceeds u32 range");
    put_u32(out, static_cast<std::uint32_t>(dim));
  }
  for (double v : t.values()) put_f32(out, static_cast<float>(v));
  return out;
}

Tensor tensor_from_bytes(const std::string& bytes) {
  ByteReader r(bytes);
  Tensor t = read_tensor(r);
  if (r.remaining() != 0)
    throw FormatError("trailing bytes after tensor data", r.offset());
  return t;
}

void tensor_save(const Tensor& t, const std::string& path) {
  std::string bytes = tensor_to_bytes(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("tensor_save: cannot open " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("tensor_save: write failed for " + path);
}

Tensor tensor_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("tensor_load: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return tensor_from_bytes(buf.str());
}

Tensor quantize_f32(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.values()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace advbench
