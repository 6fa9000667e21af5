#include "advbench/rng.hpp"

#include <cmath>
#include <numbers>

namespace advbench {

double SplitMix64::normal(double mean, double stddev) {
  // Box-Muller; u1 shifted away from zero so the log stays finite.
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  double z = std::sqrt(-2.0 * std::log(u1)) *
             std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

std::vector<std::size_t> SplitMix64::permutation(std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(next_below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace advbench
