#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace advbench {

// Dense row-major n-dimensional array of doubles. Values are immutable by
// convention once an operation has returned one; all library operations
// produce fresh tensors instead of writing through shared state.
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor. Every dimension must be positive.
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::initializer_list<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-checked accessors for the common layouts.
  double& at(std::size_t i);
  double at(std::size_t i) const;
  double& at(std::size_t y, std::size_t x);
  double at(std::size_t y, std::size_t x) const;
  double& at(std::size_t c, std::size_t y, std::size_t x);
  double at(std::size_t c, std::size_t y, std::size_t x) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

enum class NormKind { L1, L2, LInf };

// Parses "1", "2" or "inf"; anything else is invalid-argument.
NormKind parse_norm(const std::string& text);
std::string norm_name(NormKind kind);

// Element-wise clamp to [lo, hi]. lo must not exceed hi.
Tensor clip(const Tensor& t, double lo, double hi);

// Vector p-norm over all elements; the tensor must be nonempty.
double norm(const Tensor& t, NormKind kind);

// Helpers used throughout the attack and defense code.
Tensor clip01(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);
double l2_diff(const Tensor& a, const Tensor& b);

}  // namespace advbench
