#include <algorithm>
#include <stdexcept>

#include "advbench/attacks.hpp"
#include "advbench/dct.hpp"
#include "attacks_internal.hpp"

namespace advbench {

namespace {

struct BasisIndex {
  std::size_t channel, row, col;  // pixel coordinates or DCT coefficients
};

// Candidate directions. px: every pixel. dct: the coefficients of the
// freq_dim x freq_dim low-frequency block, subsampled by stride.
std::vector<BasisIndex> candidate_list(const AttackSpec& spec, std::size_t c,
                                       std::size_t h, std::size_t w) {
  std::vector<BasisIndex> out;
  if (spec.basis == SimbaBasis::Px) {
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        for (std::size_t ch = 0; ch < c; ++ch) out.push_back({ch, y, x});
  } else {
    auto fd = static_cast<std::size_t>(spec.freq_dim);
    auto stride = static_cast<std::size_t>(spec.stride);
    for (std::size_t ki = 0; ki < fd; ki += stride)
      for (std::size_t kj = 0; kj < fd; kj += stride)
        for (std::size_t ch = 0; ch < c; ++ch) out.push_back({ch, ki, kj});
  }
  return out;
}

// Antidiagonal sweep from the top-left: (0,0), (0,1), (1,0), (0,2), ...
// Low frequencies (or top-left pixels) come first.
std::vector<std::size_t> diagonal_order(const std::vector<BasisIndex>& list) {
  std::vector<std::size_t> order(list.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const BasisIndex& p = list[a];
    const BasisIndex& q = list[b];
    if (p.row + p.col != q.row + q.col) return p.row + p.col < q.row + q.col;
    if (p.row != q.row) return p.row < q.row;
    return p.channel < q.channel;
  });
  return order;
}

}  // namespace

AttackOutcome simba(const Classifier& classifier, const Tensor& x,
                    const AttackSpec& spec, SplitMix64& rng,
                    std::optional<int> source_label) {
  if (x.rank() != 3)
    throw std::invalid_argument("simba: expected a [C,H,W] input");
  if (spec.max_iter < 1) throw std::invalid_argument("simba: max_iter must be >= 1");
  if (spec.epsilon <= 0.0)
    throw std::invalid_argument("simba: epsilon must be positive");
  if (spec.stride < 1) throw std::invalid_argument("simba: stride must be >= 1");
  std::size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
  if (spec.basis == SimbaBasis::Dct) {
    if (spec.freq_dim < 1 ||
        static_cast<std::size_t>(spec.freq_dim) > std::min(h, w))
      throw std::invalid_argument("simba: freq_dim must be in [1, min(H, W)]");
  }

  AttackOutcome outcome;
  auto query = [&](const Tensor& img) {
    ++outcome.queries_used;
    return classifier.class_probabilities(img);
  };

  Tensor probs = query(x);
  int y_src = source_label.value_or(argmax_lowest(probs));
  if (y_src < 0 || static_cast<std::size_t>(y_src) >= probs.size())
    throw std::invalid_argument("simba: source label out of range");

  Tensor cur = x;
  double p_src = probs[static_cast<std::size_t>(y_src)];
  bool misclassified = argmax_lowest(probs) != y_src;

  std::vector<BasisIndex> candidates = candidate_list(spec, c, h, w);
  std::vector<std::size_t> order;
  std::size_t pos = 0;
  auto refill = [&] {
    order = spec.order == SimbaOrder::Random ? rng.permutation(candidates.size())
                                             : diagonal_order(candidates);
    pos = 0;
  };
  refill();

  int iterations = 0;
  for (int it = 0; it < spec.max_iter && !misclassified; ++it) {
    if (pos == order.size()) refill();  // exhausted: start a fresh sweep
    const BasisIndex& bi = candidates[order[pos++]];
    ++iterations;

    // Direction tensor restricted to one channel.
    Tensor direction({c, h, w});
    if (spec.basis == SimbaBasis::Px) {
      direction.at(bi.channel, bi.row, bi.col) = 1.0;
    } else {
      Tensor atom = dct2_basis_atom(h, w, bi.row, bi.col);
      double* dst = direction.data() + bi.channel * h * w;
      for (std::size_t i = 0; i < h * w; ++i) dst[i] = atom[i];
    }

    for (double sign : {1.0, -1.0}) {
      Tensor cand = cur;
      for (std::size_t i = 0; i < cand.size(); ++i)
        cand[i] += sign * spec.epsilon * direction[i];
      cand = clip01(cand);
      Tensor cand_probs = query(cand);
      double p = cand_probs[static_cast<std::size_t>(y_src)];
      if (p < p_src) {  // strict decrease only
        cur = std::move(cand);
        p_src = p;
        outcome.objective_trace.push_back(p);
        misclassified = argmax_lowest(cand_probs) != y_src;
        break;
      }
    }
  }

  outcome.x_adv = std::move(cur);
  outcome.iterations_used = iterations;
  outcome.success = classifier.predict(outcome.x_adv) != y_src;
  ++outcome.queries_used;  // the success re-check above is also a query
  outcome.perturbation_linf = max_abs_diff(outcome.x_adv, x);
  outcome.perturbation_l2 = l2_diff(outcome.x_adv, x);
  return outcome;
}

}  // namespace advbench
