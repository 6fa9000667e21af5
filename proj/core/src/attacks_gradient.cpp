#include <cmath>
#include <limits>
#include <stdexcept>

#include "advbench/attacks.hpp"
#include "attacks_internal.hpp"

namespace advbench {

namespace {

using detail::constrain;
using detail::finalize_outcome;
using detail::random_in_ball;
using detail::resolve_source_label;
using detail::step_direction;

void validate_ball_spec(const AttackSpec& spec, const char* op) {
  if (spec.eps < 0.0)
    throw std::invalid_argument(std::string(op) + ": eps must be >= 0");
  if (spec.targeted && spec.target_class < 0)
    throw std::invalid_argument(std::string(op) +
                                ": targeted attack needs target_class");
  if (spec.num_random_init < 0)
    throw std::invalid_argument(std::string(op) + ": num_random_init must be >= 0");
}

// Loss-ascent gradient for the attack: the cross-entropy gradient w.r.t. the
// input for the label being moved away from (untargeted), or its negation
// for the target class (targeted descent).
Tensor attack_gradient(const Model& model, const Tensor& x, bool targeted,
                       int label) {
  Tensor g = input_gradient(model, x, label, 1.0);
  if (targeted)
    for (double& v : g.values()) v = -v;
  return g;
}

double eval_attack_loss(const Model& model, const Tensor& x, int label) {
  return cross_entropy(forward(model, x), label, 1.0);
}

// Normal draw with mean eps/2 and std eps/4, rejected until inside [0, eps].
double truncated_eps(double eps, SplitMix64& rng) {
  if (eps <= 0.0) return eps;
  for (;;) {
    double v = rng.normal(eps / 2.0, eps / 4.0);
    if (v >= 0.0 && v <= eps) return v;
  }
}

}  // namespace

AttackOutcome fgsm(const Model& model, const Tensor& x, const AttackSpec& spec,
                   SplitMix64& rng, std::optional<int> source_label) {
  validate_ball_spec(spec, "fgsm");
  if (spec.minimal && spec.eps_step <= 0.0)
    throw std::invalid_argument("fgsm: minimal mode needs eps_step > 0");
  int y_src = resolve_source_label(model, x, source_label);
  int attack_label = spec.targeted ? spec.target_class : y_src;

  int restarts = std::max(1, spec.num_random_init);
  AttackOutcome outcome;
  for (int r = 0; r < restarts; ++r) {
    Tensor start = x;
    if (spec.num_random_init > 0) {
      Tensor noise = random_in_ball(x.shape(), spec.eps, spec.norm, rng);
      for (std::size_t i = 0; i < start.size(); ++i) start[i] += noise[i];
      start = constrain(start, x, spec.eps, spec.norm);
    }

    bool zero_grad = false;
    Tensor dir = step_direction(attack_gradient(model, start, spec.targeted, attack_label),
                                spec.norm, zero_grad);
    if (zero_grad && spec.norm != NormKind::LInf) {
      // No usable direction under a p-norm; leave the input untouched.
      outcome.x_adv = x;
      outcome.iterations_used = 0;
      finalize_outcome(outcome, x, predict(model, outcome.x_adv), y_src);
      if (outcome.success) return outcome;
      continue;
    }

    if (spec.minimal) {
      Tensor best = start;
      int steps = 0;
      for (double step = spec.eps_step; step <= spec.eps + 1e-15;
           step += spec.eps_step) {
        Tensor cand = start;
        for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += step * dir[i];
        cand = constrain(cand, x, spec.eps, spec.norm);
        ++steps;
        best = cand;
        if (predict(model, cand) != y_src) break;
      }
      outcome.x_adv = std::move(best);
      outcome.iterations_used = steps;
    } else {
      Tensor cand = start;
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += spec.eps * dir[i];
      cand = constrain(cand, x, spec.eps, spec.norm);
      outcome.x_adv = std::move(cand);
      outcome.iterations_used = 1;
    }
    finalize_outcome(outcome, x, predict(model, outcome.x_adv), y_src);
    if (outcome.success) return outcome;
  }
  return outcome;
}

namespace {

struct IterativeOptions {
  NormKind norm;
  double eps;
  double eps_step;
  int max_iter;
  int num_random_init;
  std::optional<double> decay;
  bool targeted;
  int attack_label;
  int y_src;
};

AttackOutcome iterative_gradient_attack(const Model& model, const Tensor& x,
                                        const IterativeOptions& opt,
                                        SplitMix64& rng) {
  int restarts = std::max(1, opt.num_random_init);
  AttackOutcome best_outcome;
  double best_score = opt.targeted ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    Tensor cur = x;
    if (opt.num_random_init > 0) {
      Tensor noise = random_in_ball(x.shape(), opt.eps, opt.norm, rng);
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += noise[i];
      cur = constrain(cur, x, opt.eps, opt.norm);
    }

    Tensor velocity;
    if (opt.decay) velocity = Tensor(x.shape());

    int iterations = 0;
    bool success = false;
    for (int it = 0; it < opt.max_iter; ++it) {
      Tensor g = attack_gradient(model, cur, opt.targeted, opt.attack_label);
      Tensor dir;
      bool zero_grad = false;
      if (opt.decay) {
        // Momentum: accumulate the L1-normalized gradient, step by its sign.
        double g_l1 = norm(g, NormKind::L1);
        for (std::size_t i = 0; i < velocity.size(); ++i)
          velocity[i] = *opt.decay * velocity[i] +
                        (g_l1 > 0.0 ? g[i] / g_l1 : 0.0);
        dir = step_direction(velocity, NormKind::LInf, zero_grad);
      } else {
        dir = step_direction(g, opt.norm, zero_grad);
      }
      if (zero_grad) break;

      for (std::size_t i = 0; i < cur.size(); ++i)
        cur[i] += opt.eps_step * dir[i];
      cur = constrain(cur, x, opt.eps, opt.norm);
      ++iterations;

      int pred = predict(model, cur);
      bool done = opt.targeted ? pred == opt.attack_label : pred != opt.y_src;
      if (done) {
        success = true;
        break;
      }
    }

    AttackOutcome outcome;
    outcome.x_adv = std::move(cur);
    outcome.iterations_used = iterations;
    finalize_outcome(outcome, x, predict(model, outcome.x_adv), opt.y_src);
    if (success || outcome.success) return outcome;

    double score = eval_attack_loss(model, outcome.x_adv, opt.attack_label);
    bool better = opt.targeted ? score < best_score : score > best_score;
    if (r == 0 || better) {
      best_score = score;
      best_outcome = std::move(outcome);
    }
  }
  return best_outcome;
}

}  // namespace

AttackOutcome bim(const Model& model, const Tensor& x, const AttackSpec& spec,
                  SplitMix64& rng, std::optional<int> source_label) {
  validate_ball_spec(spec, "bim");
  if (spec.max_iter < 1) throw std::invalid_argument("bim: max_iter must be >= 1");
  int y_src = resolve_source_label(model, x, source_label);
  IterativeOptions opt{
      .norm = NormKind::LInf,
      .eps = spec.eps,
      .eps_step = spec.eps_step,
      .max_iter = spec.max_iter,
      .num_random_init = 0,
      .decay = std::nullopt,
      .targeted = spec.targeted,
      .attack_label = spec.targeted ? spec.target_class : y_src,
      .y_src = y_src,
  };
  return iterative_gradient_attack(model, x, opt, rng);
}

AttackOutcome pgd(const Model& model, const Tensor& x, const AttackSpec& spec,
                  SplitMix64& rng, std::optional<int> source_label) {
  validate_ball_spec(spec, "pgd");
  if (spec.max_iter < 1) throw std::invalid_argument("pgd: max_iter must be >= 1");
  int y_src = resolve_source_label(model, x, source_label);

  double eps = spec.eps;
  double eps_step = spec.eps_step;
  if (spec.random_eps && spec.eps > 0.0) {
    // eps drawn from a truncated normal; the eps/eps_step ratio is preserved.
    double drawn = truncated_eps(spec.eps, rng);
    eps_step = spec.eps_step * (drawn / spec.eps);
    eps = drawn;
  }

  IterativeOptions opt{
      .norm = spec.norm,
      .eps = eps,
      .eps_step = eps_step,
      .max_iter = spec.max_iter,
      .num_random_init = spec.num_random_init,
      .decay = spec.decay,
      .targeted = spec.targeted,
      .attack_label = spec.targeted ? spec.target_class : y_src,
      .y_src = y_src,
  };
  return iterative_gradient_attack(model, x, opt, rng);
}

}  // namespace advbench
