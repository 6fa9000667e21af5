#include "advbench/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace advbench {

namespace {

std::size_t checked_element_count(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw std::invalid_argument("tensor shape must be non-empty");
  std::size_t count = 1;
  for (std::size_t dim : shape) {
    if (dim == 0) throw std::invalid_argument("tensor dimensions must be positive");
    if (dim != 0 && count > SIZE_MAX / dim)
      throw std::invalid_argument("tensor shape overflows size_t");
    count *= dim;
  }
  return count;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_element_count(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_element_count(shape_) != data_.size())
    throw std::invalid_argument("tensor data length does not match shape");
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

double& Tensor::at(std::size_t i) {
  assert(rank() == 1);
  return data_[i];
}
double Tensor::at(std::size_t i) const {
  assert(rank() == 1);
  return data_[i];
}
double& Tensor::at(std::size_t y, std::size_t x) {
  assert(rank() == 2);
  return data_[y * shape_[1] + x];
}
double Tensor::at(std::size_t y, std::size_t x) const {
  assert(rank() == 2);
  return data_[y * shape_[1] + x];
}
double& Tensor::at(std::size_t c, std::size_t y, std::size_t x) {
  assert(rank() == 3);
  return data_[(c * shape_[1] + y) * shape_[2] + x];
}
double Tensor::at(std::size_t c, std::size_t y, std::size_t x) const {
  assert(rank() == 3);
  return data_[(c * shape_[1] + y) * shape_[2] + x];
}

NormKind parse_norm(const std::string& text) {
  if (text == "inf") return NormKind::LInf;
  if (text == "1") return NormKind::L1;
  if (text == "2") return NormKind::L2;
  throw std::invalid_argument("unsupported norm \"" + text + "\" (expected 1, 2 or inf)");
}

std::string norm_name(NormKind kind) {
  switch (kind) {
    case NormKind::L1: return "1";
    case NormKind::L2: return "2";
    case NormKind::LInf: return "inf";
  }
  return "?";
}

Tensor clip(const Tensor& t, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clip: lo must not exceed hi");
  Tensor out = t;
  for (double& v : out.values()) v = std::min(std::max(v, lo), hi);
  return out;
}

double norm(const Tensor& t, NormKind kind) {
  if (t.empty()) throw std::invalid_argument("norm: tensor must be non-empty");
  switch (kind) {
    case NormKind::L1: {
      double sum = 0.0;
      for (double v : t.values()) sum += std::fabs(v);
      return sum;
    }
    case NormKind::L2: {
      double sum = 0.0;
      for (double v : t.values()) sum += v * v;
      return std::sqrt(sum);
    }
    case NormKind::LInf: {
      double best = 0.0;
      for (double v : t.values()) best = std::max(best, std::fabs(v));
      return best;
    }
  }
  throw std::invalid_argument("norm: unsupported norm kind");
}

Tensor clip01(const Tensor& t) { return clip(t, 0.0, 1.0); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    best = std::max(best, std::fabs(a[i] - b[i]));
  return best;
}

double l2_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("l2_diff: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace advbench
