#pragma once

#include <span>

#include "advbench/tensor.hpp"

namespace advbench {

// Mean over all elements of |a_i - b_i|. Shapes must match.
double mean_perturbation(const Tensor& a, const Tensor& b);

// 10*log10(1/MSE) for images in [0,1] (MAX = 1.0). Returns +infinity when
// the tensors are identical.
double psnr(const Tensor& a, const Tensor& b);

// Fraction of indices where the prediction changed.
double attack_success_rate(std::span<const int> clean_preds,
                           std::span<const int> adv_preds);

// Fraction of adversarial inputs whose clean prediction the defense
// restored.
double defense_success_rate(std::span<const int> clean_preds,
                            std::span<const int> defended_adv_preds);

}  // namespace advbench
