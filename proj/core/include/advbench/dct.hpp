#pragma once

#include "advbench/tensor.hpp"

namespace advbench {

// Orthonormal (unitary) type-II 2-D DCT of a rank-2 tensor, computed
// separably. With this normalization the transform preserves the L2 norm,
// so a step of size eps along a frequency atom and a step of size eps along
// a pixel atom have the same energy.
Tensor dct2(const Tensor& t);

// Exact inverse of dct2 (the type-III transform with matching scaling).
Tensor idct2(const Tensor& t);

// Spatial image of a single frequency coefficient: idct2 of the H x W
// one-hot tensor with a 1 at (ki, kj). Rank-1 separable form, O(H*W).
Tensor dct2_basis_atom(std::size_t height, std::size_t width, std::size_t ki,
                       std::size_t kj);

}  // namespace advbench
