#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "advbench/attacks.hpp"
#include "attacks_internal.hpp"

namespace advbench {

namespace {

constexpr double kTanhSmoother = 0.999999;

Tensor pixel_to_tanh(const Tensor& x) {
  Tensor w = x;
  for (double& v : w.values()) v = std::atanh((2.0 * v - 1.0) * kTanhSmoother);
  return w;
}

Tensor tanh_to_pixel(const Tensor& w) {
  Tensor x = w;
  for (double& v : x.values()) v = (std::tanh(v) + 1.0) / 2.0;
  return x;
}

struct CwEval {
  double loss = 0.0;
  double distance_sq = 0.0;
  double margin = 0.0;  // z_src - max_{i != src} z_i (untargeted form)
  int pred = -1;
  Tensor image;
  Tensor logits;
};

}  // namespace

AttackOutcome cw_l2(const Model& model, const Tensor& x, const AttackSpec& spec,
                    SplitMix64& /*rng*/, std::optional<int> source_label) {
  if (spec.confidence < 0.0)
    throw std::invalid_argument("cw_l2: confidence must be >= 0");
  if (spec.max_iter < 1) throw std::invalid_argument("cw_l2: max_iter must be >= 1");
  if (spec.binary_search_steps < 1)
    throw std::invalid_argument("cw_l2: binary_search_steps must be >= 1");
  if (spec.initial_const <= 0.0)
    throw std::invalid_argument("cw_l2: initial_const must be positive");
  if (spec.targeted && spec.target_class < 0)
    throw std::invalid_argument("cw_l2: targeted attack needs target_class");

  int y_src = detail::resolve_source_label(model, x, source_label);
  int target = spec.targeted ? spec.target_class : -1;

  auto is_adversarial = [&](int pred) {
    return spec.targeted ? pred == target : pred != y_src;
  };

  AttackOutcome outcome;
  if (!spec.targeted && predict(model, x) != y_src) {
    outcome.x_adv = x;
    detail::finalize_outcome(outcome, x, predict(model, x), y_src);
    return outcome;
  }

  // Margin whose positive part the attack pays for:
  //   untargeted: z_src - max_{i != src} z_i
  //   targeted:   max_{i != t} z_i - z_t
  auto margin_of = [&](const Tensor& logits, std::size_t& runner_up) {
    std::size_t anchor =
        spec.targeted ? static_cast<std::size_t>(target) : static_cast<std::size_t>(y_src);
    double best_other = -std::numeric_limits<double>::infinity();
    runner_up = anchor;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (i == anchor) continue;
      if (logits[i] > best_other) {
        best_other = logits[i];
        runner_up = i;
      }
    }
    return spec.targeted ? best_other - logits[anchor]
                         : logits[anchor] - best_other;
  };

  auto evaluate = [&](const Tensor& w, double c) {
    CwEval e;
    e.image = tanh_to_pixel(w);
    e.logits = forward(model, e.image);
    e.pred = argmax_lowest(e.logits);
    std::size_t runner_up = 0;
    e.margin = margin_of(e.logits, runner_up);
    e.distance_sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = e.image[i] - x[i];
      e.distance_sq += d * d;
    }
    double f = std::max(e.margin, -spec.confidence);
    e.loss = e.distance_sq + c * f;
    return e;
  };

  auto gradient = [&](const Tensor& w, const CwEval& e, double c) {
    // d(loss)/d(image), then chained through the tanh change of variables.
    Tensor dimage = e.image;
    for (std::size_t i = 0; i < dimage.size(); ++i)
      dimage[i] = 2.0 * (e.image[i] - x[i]);
    if (e.margin > -spec.confidence) {
      std::size_t anchor = spec.targeted ? static_cast<std::size_t>(target)
                                         : static_cast<std::size_t>(y_src);
      std::size_t runner_up = 0;
      (void)margin_of(e.logits, runner_up);
      Tensor seed({e.logits.size()});
      if (spec.targeted) {
        seed[runner_up] = c;
        seed[anchor] = -c;
      } else {
        seed[anchor] = c;
        seed[runner_up] = -c;
      }
      Tensor dlogit_part = input_gradient_from_logits(model, e.image, seed);
      for (std::size_t i = 0; i < dimage.size(); ++i) dimage[i] += dlogit_part[i];
    }
    Tensor dw = dimage;
    for (std::size_t i = 0; i < dw.size(); ++i) {
      double t = std::tanh(w[i]);
      dw[i] *= (1.0 - t * t) / 2.0;
    }
    return dw;
  };

  Tensor w0 = pixel_to_tanh(clip01(x));
  CwConstSchedule schedule(spec.initial_const);

  Tensor best_adv;
  double best_l2_sq = std::numeric_limits<double>::infinity();
  Tensor last_image;
  int iterations = 0;

  for (int round = 0; round < spec.binary_search_steps; ++round) {
    double c = schedule.current();
    Tensor w = w0;
    double lr = spec.learning_rate;
    CwEval cur = evaluate(w, c);
    bool round_success = false;

    auto consider = [&](const CwEval& e) {
      if (is_adversarial(e.pred) && e.distance_sq < best_l2_sq) {
        best_l2_sq = e.distance_sq;
        best_adv = e.image;
        round_success = true;
      } else if (is_adversarial(e.pred)) {
        round_success = true;
      }
    };
    consider(cur);

    for (int it = 0; it < spec.max_iter; ++it) {
      Tensor g = gradient(w, cur, c);

      auto step = [&](double rate) {
        Tensor wn = w;
        for (std::size_t i = 0; i < wn.size(); ++i) wn[i] -= rate * g[i];
        return wn;
      };

      Tensor w_new = step(lr);
      CwEval eval_new = evaluate(w_new, c);
      if (eval_new.loss < cur.loss) {
        // Keep doubling while it helps.
        for (int d = 0; d < spec.max_doubling; ++d) {
          double lr2 = lr * 2.0;
          Tensor w2 = step(lr2);
          CwEval e2 = evaluate(w2, c);
          if (e2.loss < eval_new.loss) {
            lr = lr2;
            w_new = std::move(w2);
            eval_new = std::move(e2);
          } else {
            break;
          }
        }
      } else {
        // Halve until progress or the budget runs out.
        int h = 0;
        while (h < spec.max_halving && eval_new.loss >= cur.loss) {
          lr /= 2.0;
          w_new = step(lr);
          eval_new = evaluate(w_new, c);
          ++h;
        }
      }
      if (eval_new.loss >= cur.loss) break;  // line search stalled

      w = std::move(w_new);
      cur = std::move(eval_new);
      ++iterations;
      consider(cur);
    }

    last_image = cur.image;
    outcome.objective_trace.push_back(
        std::isfinite(best_l2_sq) ? std::sqrt(best_l2_sq) : -1.0);
    schedule.report(round_success);
  }

  outcome.x_adv = clip01(best_adv.empty() ? last_image : best_adv);
  outcome.iterations_used = iterations;
  detail::finalize_outcome(outcome, x, predict(model, outcome.x_adv), y_src);
  return outcome;
}

}  // namespace advbench
