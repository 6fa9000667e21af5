#include "advbench/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace advbench {

double mean_perturbation(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("mean_perturbation: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

double psnr(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

void check_pair(std::span<const int> a, std::span<const int> b, const char* op) {
  if (a.empty()) throw std::invalid_argument(std::string(op) + ": empty input");
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(op) + ": length mismatch");
}

}  // namespace

double attack_success_rate(std::span<const int> clean_preds,
                           std::span<const int> adv_preds) {
  check_pair(clean_preds, adv_preds, "attack_success_rate");
  std::size_t changed = 0;
  for (std::size_t i = 0; i < clean_preds.size(); ++i)
    if (clean_preds[i] != adv_preds[i]) ++changed;
  return static_cast<double>(changed) / static_cast<double>(clean_preds.size());
}

double defense_success_rate(std::span<const int> clean_preds,
                            std::span<const int> defended_adv_preds) {
  check_pair(clean_preds, defended_adv_preds, "defense_success_rate");
  std::size_t restored = 0;
  for (std::size_t i = 0; i < clean_preds.size(); ++i)
    if (clean_preds[i] == defended_adv_preds[i]) ++restored;
  return static_cast<double>(restored) / static_cast<double>(clean_preds.size());
}

}  // namespace advbench
