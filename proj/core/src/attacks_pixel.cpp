#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "advbench/attacks.hpp"
#include "attacks_internal.hpp"

namespace advbench {

namespace {

constexpr std::size_t kPopulation = 40;
constexpr double kMutationFactor = 0.5;   // DE "F"
constexpr double kCrossoverRate = 0.7;    // binomial crossover "CR"
constexpr int kMaxThresholdSearch = 5;    // th unset: try 1..5

// A candidate is th tuples of (row, col, value per channel), stored
// continuously; rows/cols are rounded at application time.
struct PixelProblem {
  std::size_t channels, height, width;
  int th;
  std::size_t tuple_len() const { return 2 + channels; }
  std::size_t dims() const { return static_cast<std::size_t>(th) * tuple_len(); }

  double upper(std::size_t d) const {
    switch (d % tuple_len()) {
      case 0: return static_cast<double>(height - 1);
      case 1: return static_cast<double>(width - 1);
      default: return 1.0;
    }
  }

  Tensor apply(const Tensor& x, const std::vector<double>& genome) const {
    Tensor img = x;
    for (int t = 0; t < th; ++t) {
      const double* g = genome.data() + static_cast<std::size_t>(t) * tuple_len();
      auto row = static_cast<std::size_t>(std::clamp(
          std::lround(g[0]), 0L, static_cast<long>(height - 1)));
      auto col = static_cast<std::size_t>(std::clamp(
          std::lround(g[1]), 0L, static_cast<long>(width - 1)));
      for (std::size_t ch = 0; ch < channels; ++ch)
        img.at(ch, row, col) = std::clamp(g[2 + ch], 0.0, 1.0);
    }
    return img;
  }
};

}  // namespace

AttackOutcome pixel_attack(const Classifier& classifier, const Tensor& x,
                           const AttackSpec& spec, SplitMix64& rng,
                           std::optional<int> source_label) {
  if (spec.es == 0)
    throw std::invalid_argument(
        "pixel_attack: es=0 (CMA-ES) is not supported; use es=1 (differential evolution)");
  if (spec.es != 1)
    throw std::invalid_argument("pixel_attack: es must be 0 or 1");
  if (spec.th && *spec.th < 1)
    throw std::invalid_argument("pixel_attack: th must be >= 1 when set");
  if (spec.max_iter < 1)
    throw std::invalid_argument("pixel_attack: max_iter must be >= 1");
  if (x.rank() != 3)
    throw std::invalid_argument("pixel_attack: expected a [C,H,W] input");

  AttackOutcome outcome;
  auto query = [&](const Tensor& img) {
    ++outcome.queries_used;
    return classifier.class_probabilities(img);
  };

  Tensor clean_probs = query(x);
  int y_src = source_label.value_or(argmax_lowest(clean_probs));
  if (y_src < 0 || static_cast<std::size_t>(y_src) >= clean_probs.size())
    throw std::invalid_argument("pixel_attack: source label out of range");
  if (argmax_lowest(clean_probs) != y_src) {
    outcome.x_adv = x;
    outcome.success = true;
    return outcome;
  }

  std::vector<int> thresholds;
  if (spec.th)
    thresholds.push_back(*spec.th);
  else
    for (int t = 1; t <= kMaxThresholdSearch; ++t) thresholds.push_back(t);

  Tensor best_image = x;
  double best_fitness = clean_probs[static_cast<std::size_t>(y_src)];
  int generations = 0;

  for (int th : thresholds) {
    PixelProblem prob{x.shape()[0], x.shape()[1], x.shape()[2], th};
    std::size_t dims = prob.dims();

    std::vector<std::vector<double>> pop(kPopulation, std::vector<double>(dims));
    std::vector<double> fitness(kPopulation);
    std::vector<Tensor> images(kPopulation);

    auto evaluate = [&](const std::vector<double>& genome, Tensor& img_out) {
      img_out = prob.apply(x, genome);
      Tensor probs = query(img_out);
      double fit = probs[static_cast<std::size_t>(y_src)];
      bool flipped = argmax_lowest(probs) != y_src;
      return std::pair<double, bool>(fit, flipped);
    };

    bool done = false;
    for (std::size_t i = 0; i < kPopulation && !done; ++i) {
      for (std::size_t d = 0; d < dims; ++d)
        pop[i][d] = rng.uniform(0.0, prob.upper(d));
      auto [fit, flipped] = evaluate(pop[i], images[i]);
      fitness[i] = fit;
      if (fit < best_fitness) {
        best_fitness = fit;
        best_image = images[i];
      }
      if (flipped) {
        best_image = images[i];
        done = true;
      }
    }

    for (int gen = 0; gen < spec.max_iter && !done; ++gen) {
      ++generations;
      for (std::size_t i = 0; i < kPopulation && !done; ++i) {
        // rand/1/bin mutation with three distinct partners.
        std::size_t a, b, c;
        do a = rng.next_below(kPopulation); while (a == i);
        do b = rng.next_below(kPopulation); while (b == i || b == a);
        do c = rng.next_below(kPopulation); while (c == i || c == a || c == b);

        std::vector<double> trial = pop[i];
        std::size_t j_rand = rng.next_below(dims);
        for (std::size_t d = 0; d < dims; ++d) {
          if (d == j_rand || rng.next_double() < kCrossoverRate) {
            double v = pop[a][d] + kMutationFactor * (pop[b][d] - pop[c][d]);
            trial[d] = std::clamp(v, 0.0, prob.upper(d));
          }
        }

        Tensor trial_img;
        auto [fit, flipped] = evaluate(trial, trial_img);
        if (fit <= fitness[i]) {
          pop[i] = std::move(trial);
          fitness[i] = fit;
          images[i] = trial_img;
        }
        if (fit < best_fitness) {
          best_fitness = fit;
          best_image = trial_img;
        }
        if (flipped) {
          best_image = std::move(trial_img);
          done = true;
        }
      }
      outcome.objective_trace.push_back(best_fitness);
    }
    if (done) break;  // first succeeding threshold wins
  }

  outcome.x_adv = std::move(best_image);
  outcome.iterations_used = generations;
  outcome.success = classifier.predict(outcome.x_adv) != y_src;
  ++outcome.queries_used;
  outcome.perturbation_linf = max_abs_diff(outcome.x_adv, x);
  outcome.perturbation_l2 = l2_diff(outcome.x_adv, x);
  return outcome;
}

}  // namespace advbench
