#pragma once

#include <optional>

#include "advbench/attacks.hpp"

namespace advbench::detail {

// Fills success and perturbation bookkeeping from the final tensor. success
// is re-derived as predict(x_adv) != source_label rather than trusting any
// attack-internal flag.
void finalize_outcome(AttackOutcome& outcome, const Tensor& x,
                      int final_pred, int source_label);

// Step direction for a gradient g: sign(g) under the max norm, g/||g||_p
// otherwise. zero_grad is set when the norm vanishes (caller decides how to
// stop).
Tensor step_direction(const Tensor& grad, NormKind kind, bool& zero_grad);

// Uniform sample inside the eps-ball around zero.
Tensor random_in_ball(const std::vector<std::size_t>& shape, double eps,
                      NormKind kind, SplitMix64& rng);

// clip to [0,1] first, then project back onto the eps-ball around origin.
// Both sets contain points between origin and the iterate elementwise, so
// the composition lands in their intersection.
Tensor constrain(const Tensor& candidate, const Tensor& origin, double eps,
                 NormKind kind);

int resolve_source_label(const Model& model, const Tensor& x,
                         std::optional<int> source_label);

}  // namespace advbench::detail
