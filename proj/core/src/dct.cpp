#include "advbench/dct.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace advbench {

namespace {

constexpr double kPi = std::numbers::pi;

// Orthonormal DCT-II matrix row k evaluated at sample n:
//   alpha(k) * cos(pi * (2n+1) * k / (2N)),  alpha(0)=sqrt(1/N), else sqrt(2/N).
std::vector<double> dct_matrix(std::size_t n) {
  std::vector<double> m(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    double alpha = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      m[k * n + i] = alpha * std::cos(kPi * (2.0 * i + 1.0) * k /
                                      (2.0 * static_cast<double>(n)));
  }
  return m;
}

void require_2d(const Tensor& t, const char* op) {
  if (t.rank() != 2)
    throw std::invalid_argument(std::string(op) + ": expected a 2-D tensor");
}

// out = A * in * B^T where A is applied to columns and B to rows.
Tensor transform(const Tensor& in, const std::vector<double>& rows_m,
                 const std::vector<double>& cols_m, bool transpose) {
  std::size_t h = in.shape()[0], w = in.shape()[1];
  // Row pass.
  Tensor tmp({h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t k = 0; k < w; ++k) {
      double acc = 0.0;
      for (std::size_t x = 0; x < w; ++x) {
        double coeff = transpose ? rows_m[x * w + k] : rows_m[k * w + x];
        acc += coeff * in.at(y, x);
      }
      tmp.at(y, k) = acc;
    }
  // Column pass.
  Tensor out({h, w});
  for (std::size_t k = 0; k < h; ++k)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t y = 0; y < h; ++y) {
        double coeff = transpose ? cols_m[y * h + k] : cols_m[k * h + y];
        acc += coeff * tmp.at(y, x);
      }
      out.at(k, x) = acc;
    }
  return out;
}

}  // namespace

Tensor dct2(const Tensor& t) {
  require_2d(t, "dct2");
  return transform(t, dct_matrix(t.shape()[1]), dct_matrix(t.shape()[0]), false);
}

Tensor idct2(const Tensor& t) {
  require_2d(t, "idct2");
  // The transform is orthonormal, so the inverse is the transpose.
  return transform(t, dct_matrix(t.shape()[1]), dct_matrix(t.shape()[0]), true);
}

Tensor dct2_basis_atom(std::size_t height, std::size_t width, std::size_t ki,
                       std::size_t kj) {
  if (ki >= height || kj >= width)
    throw std::invalid_argument("dct2_basis_atom: coefficient out of range");
  double ai = std::sqrt((ki == 0 ? 1.0 : 2.0) / static_cast<double>(height));
  double aj = std::sqrt((kj == 0 ? 1.0 : 2.0) / static_cast<double>(width));
  Tensor atom({height, width});
  for (std::size_t y = 0; y < height; ++y) {
    double cy = std::cos(kPi * (2.0 * y + 1.0) * ki / (2.0 * height));
    for (std::size_t x = 0; x < width; ++x) {
      double cx = std::cos(kPi * (2.0 * x + 1.0) * kj / (2.0 * width));
      atom.at(y, x) = ai * aj * cy * cx;
    }
  }
  return atom;
}

}  // namespace advbench
