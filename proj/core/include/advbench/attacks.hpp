#pragma once

#include <optional>
#include <string>
#include <vector>

#include "advbench/net.hpp"
#include "advbench/rng.hpp"
#include "advbench/tensor.hpp"

namespace advbench {

// Query-only view of a classifier. The black-box attacks accept this
// interface instead of a Model, so they cannot reach a gradient entry point
// by construction.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::size_t num_classes() const = 0;
  virtual Tensor class_probabilities(const Tensor& x) const = 0;
  int predict(const Tensor& x) const;
};

class ModelClassifier final : public Classifier {
 public:
  explicit ModelClassifier(const Model& model) : model_(&model) {}
  std::size_t num_classes() const override { return model_->num_classes; }
  Tensor class_probabilities(const Tensor& x) const override {
    return predict_proba(*model_, x);
  }

 private:
  const Model* model_;
};

enum class AttackFamily { Fgsm, Bim, Pgd, Deepfool, CwL2, Simba, Pixel };
enum class SimbaBasis { Px, Dct };
enum class SimbaOrder { Random, Diag };

AttackFamily parse_attack_family(const std::string& name);
std::string attack_family_name(AttackFamily family);

// One parameter record for all seven families, field names matching the
// upstream attack parameterizations. Each family reads only its own fields;
// the factory functions below fill in per-family defaults.
struct AttackSpec {
  AttackFamily family = AttackFamily::Fgsm;

  // fgsm / bim / pgd
  NormKind norm = NormKind::LInf;
  double eps = 0.3;
  double eps_step = 0.1;
  bool targeted = false;
  int target_class = -1;  // required when targeted
  int num_random_init = 0;
  bool minimal = false;            // fgsm minimal-perturbation mode
  bool random_eps = false;         // pgd
  std::optional<double> decay;     // pgd momentum
  int max_iter = 100;

  // deepfool (overshoot) and simba (step size) share the name "epsilon"
  double epsilon = 1e-6;
  int nb_grads = 10;

  // carlini-wagner l2
  double confidence = 0.0;
  double learning_rate = 0.01;
  int binary_search_steps = 10;
  double initial_const = 0.01;
  int max_halving = 5;
  int max_doubling = 5;

  // simba
  SimbaBasis basis = SimbaBasis::Dct;  // config key "attack": px | dct
  SimbaOrder order = SimbaOrder::Random;
  int freq_dim = 4;
  int stride = 1;

  // pixel
  std::optional<int> th;  // unset: search th = 1..5 for the first success
  int es = 1;             // 1 = differential evolution (0, CMA-ES, rejected)

  int batch_size = 32;
  bool verbose = false;
};

enum class PresetKind { PaperDefault, PaperManual };

// Shipped parameter presets ("paper-default" / "paper-manual") so benchmark
// configs can select the published settings by name.
AttackSpec attack_preset(AttackFamily family, PresetKind preset);
PresetKind parse_preset(const std::string& name);

struct AttackOutcome {
  Tensor x_adv;                // always inside [0,1]
  bool success = false;        // prediction moved away from the source label
  int iterations_used = 0;
  long long queries_used = 0;  // black-box attacks only
  double perturbation_linf = 0.0;
  double perturbation_l2 = 0.0;
  // Attack-specific bookkeeping: simba records the source-class probability
  // after each accepted step, cw_l2 the best adversarial L2 per outer round,
  // pixel the best fitness per generation.
  std::vector<double> objective_trace;
};

// All attacks: the adversarial output is clipped to [0,1]; success is
// re-derived from the final tensor as predict(x_adv) != source label.
// source_label is the class the input is pushed away from and defaults to
// the model's clean prediction, which makes success equivalent to
// "prediction changed from the clean prediction".

AttackOutcome fgsm(const Model& model, const Tensor& x, const AttackSpec& spec,
                   SplitMix64& rng, std::optional<int> source_label = {});
AttackOutcome bim(const Model& model, const Tensor& x, const AttackSpec& spec,
                  SplitMix64& rng, std::optional<int> source_label = {});
AttackOutcome pgd(const Model& model, const Tensor& x, const AttackSpec& spec,
                  SplitMix64& rng, std::optional<int> source_label = {});
AttackOutcome deepfool(const Model& model, const Tensor& x,
                       const AttackSpec& spec, SplitMix64& rng,
                       std::optional<int> source_label = {});
AttackOutcome cw_l2(const Model& model, const Tensor& x,
                    const AttackSpec& spec, SplitMix64& rng,
                    std::optional<int> source_label = {});
AttackOutcome simba(const Classifier& classifier, const Tensor& x,
                    const AttackSpec& spec, SplitMix64& rng,
                    std::optional<int> source_label = {});
AttackOutcome pixel_attack(const Classifier& classifier, const Tensor& x,
                           const AttackSpec& spec, SplitMix64& rng,
                           std::optional<int> source_label = {});

// Dispatch on spec.family; black-box families go through a ModelClassifier.
AttackOutcome run_attack(const Model& model, const Tensor& x,
                         const AttackSpec& spec, SplitMix64& rng,
                         std::optional<int> source_label = {});

// Projection of x onto the eps-ball around origin in the given norm.
Tensor project_to_ball(const Tensor& x, const Tensor& origin, double eps,
                       NormKind kind);

// Trade-off constant schedule of the C&W outer loop: multiply by 10 while no
// success has been seen (capped at 1e10), then bisect between the largest
// failing and smallest succeeding constant.
class CwConstSchedule {
 public:
  explicit CwConstSchedule(double initial_const) : c_(initial_const) {}
  double current() const { return c_; }
  void report(bool success);

  static constexpr double kConstCap = 1e10;

 private:
  double c_;
  double best_fail_ = 0.0;
  double best_success_ = 0.0;
  bool any_success_ = false;
};

}  // namespace advbench
