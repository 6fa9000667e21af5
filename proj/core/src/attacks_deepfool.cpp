#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advbench/attacks.hpp"
#include "attacks_internal.hpp"

namespace advbench {

namespace {

Tensor onehot(std::size_t n, std::size_t k) {
  Tensor t({n});
  t[k] = 1.0;
  return t;
}

}  // namespace

AttackOutcome deepfool(const Model& model, const Tensor& x,
                       const AttackSpec& spec, SplitMix64& /*rng*/,
                       std::optional<int> source_label) {
  if (spec.max_iter < 1)
    throw std::invalid_argument("deepfool: max_iter must be >= 1");
  if (spec.nb_grads < 1)
    throw std::invalid_argument("deepfool: nb_grads must be >= 1");
  if (spec.epsilon < 0.0)
    throw std::invalid_argument("deepfool: overshoot must be >= 0");

  int y_src = detail::resolve_source_label(model, x, source_label);
  std::size_t n = model.num_classes;

  AttackOutcome outcome;
  if (predict(model, x) != y_src) {
    // Already past the boundary; nothing to do.
    outcome.x_adv = x;
    outcome.iterations_used = 0;
    detail::finalize_outcome(outcome, x, predict(model, x), y_src);
    return outcome;
  }

  // Candidate classes: the top nb_grads logits of the clean input, minus the
  // source class. nb_grads larger than the class count just means "all".
  std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(spec.nb_grads), n);
  Tensor clean_logits = forward(model, x);
  std::vector<std::size_t> by_logit(n);
  for (std::size_t i = 0; i < n; ++i) by_logit[i] = i;
  std::sort(by_logit.begin(), by_logit.end(), [&](std::size_t a, std::size_t b) {
    return clean_logits[a] != clean_logits[b] ? clean_logits[a] > clean_logits[b]
                                              : a < b;
  });
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < k; ++i)
    if (by_logit[i] != static_cast<std::size_t>(y_src))
      candidates.push_back(by_logit[i]);

  Tensor cur = x;
  int iterations = 0;
  for (int it = 0; it < spec.max_iter; ++it) {
    ForwardTrace trace = forward_trace(model, cur);
    if (argmax_lowest(trace.logits) != y_src) break;

    Tensor grad_src;
    backward(model, trace, onehot(n, static_cast<std::size_t>(y_src)), &grad_src,
             nullptr);

    double best_ratio = std::numeric_limits<double>::infinity();
    Tensor best_w;
    double best_f = 0.0;
    for (std::size_t c : candidates) {
      Tensor grad_c;
      backward(model, trace, onehot(n, c), &grad_c, nullptr);
      double w_norm_sq = 0.0;
      for (std::size_t i = 0; i < grad_c.size(); ++i) {
        grad_c[i] -= grad_src[i];  // w_c = grad z_c - grad z_src
        w_norm_sq += grad_c[i] * grad_c[i];
      }
      if (w_norm_sq < 1e-24) continue;  // degenerate direction
      double f_c = trace.logits[c] - trace.logits[static_cast<std::size_t>(y_src)];
      double ratio = std::fabs(f_c) / std::sqrt(w_norm_sq);
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best_w = std::move(grad_c);
        best_f = f_c;
      }
    }
    if (!std::isfinite(best_ratio)) break;  // every hyperplane was degenerate

    double w_norm_sq = 0.0;
    for (double v : best_w.values()) w_norm_sq += v * v;
    double scale = (std::fabs(best_f) + 1e-4) / w_norm_sq;
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += scale * best_w[i];
    ++iterations;
  }

  // Apply the overshoot to the accumulated perturbation, then box-clip.
  Tensor adv = x;
  for (std::size_t i = 0; i < adv.size(); ++i)
    adv[i] += (1.0 + spec.epsilon) * (cur[i] - x[i]);
  outcome.x_adv = clip01(adv);
  outcome.iterations_used = iterations;
  detail::finalize_outcome(outcome, x, predict(model, outcome.x_adv), y_src);
  return outcome;
}

}  // namespace advbench
