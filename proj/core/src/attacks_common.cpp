#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "advbench/attacks.hpp"
#include "attacks_internal.hpp"

namespace advbench {

int Classifier::predict(const Tensor& x) const {
  return argmax_lowest(class_probabilities(x));
}

AttackFamily parse_attack_family(const std::string& name) {
  if (name == "fgsm") return AttackFamily::Fgsm;
  if (name == "bim") return AttackFamily::Bim;
  if (name == "pgd") return AttackFamily::Pgd;
  if (name == "deepfool") return AttackFamily::Deepfool;
  if (name == "cw_l2") return AttackFamily::CwL2;
  if (name == "simba") return AttackFamily::Simba;
  if (name == "pixel") return AttackFamily::Pixel;
  throw std::invalid_argument("unknown attack family \"" + name + "\"");
}

std::string attack_family_name(AttackFamily family) {
  switch (family) {
    case AttackFamily::Fgsm: return "fgsm";
    case AttackFamily::Bim: return "bim";
    case AttackFamily::Pgd: return "pgd";
    case AttackFamily::Deepfool: return "deepfool";
    case AttackFamily::CwL2: return "cw_l2";
    case AttackFamily::Simba: return "simba";
    case AttackFamily::Pixel: return "pixel";
  }
  return "?";
}

PresetKind parse_preset(const std::string& name) {
  if (name == "paper-default") return PresetKind::PaperDefault;
  if (name == "paper-manual") return PresetKind::PaperManual;
  throw std::invalid_argument("unknown preset \"" + name +
                              "\" (expected paper-default or paper-manual)");
}

AttackSpec attack_preset(AttackFamily family, PresetKind preset) {
  bool manual = preset == PresetKind::PaperManual;
  AttackSpec s;
  s.family = family;
  switch (family) {
    case AttackFamily::Fgsm:
      s.norm = NormKind::LInf;
      s.eps = manual ? 0.1 : 0.3;
      s.eps_step = manual ? 0.0005 : 0.1;
      s.num_random_init = 0;
      s.minimal = false;
      s.batch_size = 32;
      break;
    case AttackFamily::Pgd:
      s.norm = NormKind::LInf;
      s.eps = manual ? 0.1 : 0.3;
      s.eps_step = 0.1;
      s.random_eps = false;
      s.decay.reset();
      s.max_iter = 100;
      s.num_random_init = 0;
      s.batch_size = 32;
      break;
    case AttackFamily::Bim:
      s.norm = NormKind::LInf;
      s.eps = manual ? 0.1 : 0.3;
      s.eps_step = manual ? 0.05 : 0.1;
      s.max_iter = 100;
      s.batch_size = 32;
      break;
    case AttackFamily::Deepfool:
      s.max_iter = manual ? 500 : 100;
      s.epsilon = manual ? 1e-100 : 1e-6;
      s.nb_grads = 10;
      s.batch_size = 1;
      break;
    case AttackFamily::CwL2:
      s.confidence = 0.0;
      s.learning_rate = 0.01;
      s.binary_search_steps = manual ? 20 : 10;
      s.max_iter = 10;
      s.initial_const = manual ? 0.1 : 0.01;
      s.max_halving = 5;
      s.max_doubling = 5;
      s.batch_size = 1;
      break;
    case AttackFamily::Simba:
      s.basis = SimbaBasis::Dct;
      s.max_iter = 3000;
      s.epsilon = manual ? 0.125 : 0.1;
      s.order = SimbaOrder::Random;
      s.freq_dim = 4;
      s.stride = 1;
      s.batch_size = 1;
      break;
    case AttackFamily::Pixel:
      s.th.reset();
      s.es = 1;
      s.max_iter = manual ? 10 : 100;
      break;
  }
  return s;
}

Tensor project_to_ball(const Tensor& x, const Tensor& origin, double eps,
                       NormKind kind) {
  if (!x.same_shape(origin))
    throw std::invalid_argument("project_to_ball: shape mismatch");
  if (eps < 0.0) throw std::invalid_argument("project_to_ball: eps must be >= 0");
  Tensor out = x;
  switch (kind) {
    case NormKind::LInf: {
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::min(std::max(out[i], origin[i] - eps), origin[i] + eps);
      return out;
    }
    case NormKind::L2: {
      double dist = l2_diff(x, origin);
      if (dist <= eps || dist == 0.0) return out;
      double scale = eps / dist;
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = origin[i] + scale * (out[i] - origin[i]);
      return out;
    }
    case NormKind::L1: {
      // Projection of the offset onto the L1 ball (soft threshold with the
      // pivot found by sorting, Duchi et al. style).
      std::vector<double> mag(out.size());
      double total = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        mag[i] = std::fabs(out[i] - origin[i]);
        total += mag[i];
      }
      if (total <= eps) return out;
      std::vector<double> sorted = mag;
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      double cum = 0.0, theta = 0.0;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        cum += sorted[k];
        double t = (cum - eps) / static_cast<double>(k + 1);
        if (t >= (k + 1 < sorted.size() ? sorted[k + 1] : 0.0)) {
          theta = t;
          break;
        }
      }
      for (std::size_t i = 0; i < out.size(); ++i) {
        double shrunk = std::max(0.0, mag[i] - theta);
        double sign = out[i] >= origin[i] ? 1.0 : -1.0;
        out[i] = origin[i] + sign * shrunk;
      }
      return out;
    }
  }
  throw std::invalid_argument("project_to_ball: unsupported norm");
}

void CwConstSchedule::report(bool success) {
  if (success) {
    any_success_ = true;
    if (best_success_ == 0.0 || c_ < best_success_) best_success_ = c_;
  } else {
    best_fail_ = std::max(best_fail_, c_);
  }
  if (!any_success_) {
    c_ = std::min(c_ * 10.0, kConstCap);
  } else {
    c_ = 0.5 * (best_fail_ + best_success_);
  }
}

AttackOutcome run_attack(const Model& model, const Tensor& x,
                         const AttackSpec& spec, SplitMix64& rng,
                         std::optional<int> source_label) {
  switch (spec.family) {
    case AttackFamily::Fgsm: return fgsm(model, x, spec, rng, source_label);
    case AttackFamily::Bim: return bim(model, x, spec, rng, source_label);
    case AttackFamily::Pgd: return pgd(model, x, spec, rng, source_label);
    case AttackFamily::Deepfool: return deepfool(model, x, spec, rng, source_label);
    case AttackFamily::CwL2: return cw_l2(model, x, spec, rng, source_label);
    case AttackFamily::Simba: {
      ModelClassifier classifier(model);
      return simba(classifier, x, spec, rng, source_label);
    }
    case AttackFamily::Pixel: {
      ModelClassifier classifier(model);
      return pixel_attack(classifier, x, spec, rng, source_label);
    }
  }
  throw std::invalid_argument("run_attack: unknown family");
}

namespace detail {

void finalize_outcome(AttackOutcome& outcome, const Tensor& x, int final_pred,
                      int source_label) {
  outcome.success = final_pred != source_label;
  outcome.perturbation_linf = max_abs_diff(outcome.x_adv, x);
  outcome.perturbation_l2 = l2_diff(outcome.x_adv, x);
}

Tensor step_direction(const Tensor& grad, NormKind kind, bool& zero_grad) {
  zero_grad = false;
  Tensor dir = grad;
  if (kind == NormKind::LInf) {
    for (double& v : dir.values()) v = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    bool all_zero = true;
    for (double v : dir.values())
      if (v != 0.0) {
        all_zero = false;
        break;
      }
    zero_grad = all_zero;
    return dir;
  }
  double n = norm(grad, kind);
  if (n < 1e-300) {
    zero_grad = true;
    for (double& v : dir.values()) v = 0.0;
    return dir;
  }
  for (double& v : dir.values()) v /= n;
  return dir;
}

Tensor random_in_ball(const std::vector<std::size_t>& shape, double eps,
                      NormKind kind, SplitMix64& rng) {
  Tensor noise{shape};
  switch (kind) {
    case NormKind::LInf:
      for (double& v : noise.values()) v = rng.uniform(-eps, eps);
      return noise;
    case NormKind::L2: {
      double nrm2 = 0.0;
      for (double& v : noise.values()) {
        v = rng.normal(0.0, 1.0);
        nrm2 += v * v;
      }
      double radius =
          eps * std::pow(rng.next_double(),
                         1.0 / static_cast<double>(noise.size()));
      double scale = nrm2 > 0.0 ? radius / std::sqrt(nrm2) : 0.0;
      for (double& v : noise.values()) v *= scale;
      return noise;
    }
    case NormKind::L1: {
      for (double& v : noise.values()) v = rng.uniform(-eps, eps);
      Tensor zero{shape};
      return project_to_ball(noise, zero, eps, NormKind::L1);
    }
  }
  throw std::invalid_argument("random_in_ball: unsupported norm");
}

Tensor constrain(const Tensor& candidate, const Tensor& origin, double eps,
                 NormKind kind) {
  return project_to_ball(clip01(candidate), origin, eps, kind);
}

int resolve_source_label(const Model& model, const Tensor& x,
                         std::optional<int> source_label) {
  if (source_label) {
    if (*source_label < 0 ||
        static_cast<std::size_t>(*source_label) >= model.num_classes)
      throw std::invalid_argument("source label out of range");
    return *source_label;
  }
  return predict(model, x);
}

}  // namespace detail

}  // namespace advbench
