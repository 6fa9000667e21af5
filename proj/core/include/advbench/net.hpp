#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "advbench/rng.hpp"
#include "advbench/tensor.hpp"

namespace advbench {

// Minimal differentiable CNN: enough layer types for the reference
// classifier, with exact reverse-mode gradients with respect to both
// parameters (training) and inputs (white-box attacks).

enum class LayerKind : std::uint8_t {
  Conv3x3 = 0,   // stride 1, zero padding 1; weight [out_c, in_c, 3, 3]
  Relu = 1,
  MaxPool2 = 2,  // 2x2 window, stride 2, floor semantics
  Flatten = 3,
  Dense = 4,     // weight [out, in]
};

struct Layer {
  LayerKind kind;
  Tensor weight;
  Tensor bias;

  bool has_params() const {
    return kind == LayerKind::Conv3x3 || kind == LayerKind::Dense;
  }
};

struct Model {
  std::size_t in_channels = 1;
  std::size_t in_height = 28;
  std::size_t in_width = 28;
  std::size_t num_classes = 0;
  // Temperature used when the model is asked for probabilities without an
  // explicit temperature. Distilled students run at 1.0 regardless of their
  // training temperature.
  double inference_temperature = 1.0;
  std::vector<Layer> layers;
};

struct LayerSpec {
  LayerKind kind;
  std::size_t out = 0;  // Conv3x3: output channels; Dense: output width
};

// Builds a model with Xavier-uniform weights (+-sqrt(6/(fan_in+fan_out)))
// drawn from rng. The last layer must be Dense; its width becomes
// num_classes.
Model build_model(std::size_t in_channels, std::size_t in_height,
                  std::size_t in_width, std::span<const LayerSpec> spec,
                  SplitMix64& rng);

// The reference classifier: 1x28x28 -> Conv(8) -> ReLU -> MaxPool2 ->
// Conv(16) -> ReLU -> MaxPool2 -> Flatten -> Dense(64) -> ReLU ->
// Dense(num_classes). width_divisor > 1 shrinks every Conv/hidden-Dense
// width by that factor (used by the distillation student knob).
Model reference_model(std::size_t num_classes, SplitMix64& rng,
                      std::size_t width_divisor = 1);

// ---- forward / backward ----

struct ForwardTrace {
  std::vector<Tensor> inputs;                      // input seen by each layer
  std::vector<std::vector<std::size_t>> pool_src;  // argmax source per pool output
  Tensor logits;
};

Tensor forward(const Model& model, const Tensor& x);
ForwardTrace forward_trace(const Model& model, const Tensor& x);

struct ParamGrads {
  std::vector<Tensor> dweight;  // aligned with model.layers; empty when no params
  std::vector<Tensor> dbias;

  void accumulate(const ParamGrads& other, double scale);
};

// Reverse pass from an arbitrary gradient seed in logit space. Either output
// may be null when not needed.
void backward(const Model& model, const ForwardTrace& trace,
              const Tensor& dlogits, Tensor* dinput, ParamGrads* dparams);

// Total number of calls into backward() since process start. The black-box
// attacks are forbidden from reaching any gradient entry point; the purity
// checks snapshot this counter around their runs.
std::uint64_t gradient_call_count();

// ---- losses, probabilities, prediction ----

enum class LossKind { CrossEntropyHard, CrossEntropySoft };

// Numerically stabilized temperature softmax: p_i = exp(z_i/T) / sum_j
// exp(z_j/T), computed after subtracting the max logit. T must be positive.
Tensor softmax_t(const Tensor& logits, double temperature);

double cross_entropy(const Tensor& logits, int label, double temperature);
// Soft targets must sum to 1 within 1e-6.
double cross_entropy(const Tensor& logits, const Tensor& soft_target,
                     double temperature);

// d(loss)/d(logits) = (softmax_T(z) - target) / T.
Tensor ce_logit_gradient(const Tensor& logits, int label, double temperature);
Tensor ce_logit_gradient(const Tensor& logits, const Tensor& soft_target,
                         double temperature);

// Gradient of the scalar loss with respect to every input element.
Tensor input_gradient(const Model& model, const Tensor& x, int label,
                      double temperature = 1.0);
Tensor input_gradient(const Model& model, const Tensor& x,
                      const Tensor& soft_target, double temperature = 1.0);

// Gradient seeded from an arbitrary logit-space direction (used by attacks
// that differentiate individual logits rather than a loss).
Tensor input_gradient_from_logits(const Model& model, const Tensor& x,
                                  const Tensor& dlogits);

// Batch-mean parameter gradients. targets is either a span of labels or a
// span of soft-target tensors matching batch order.
ParamGrads param_gradients(const Model& model, std::span<const Tensor> batch,
                           std::span<const int> labels, double temperature);
ParamGrads param_gradients(const Model& model, std::span<const Tensor> batch,
                           std::span<const Tensor> soft_targets,
                           double temperature);

// Argmax of the logits; ties break to the lowest class index.
int predict(const Model& model, const Tensor& x);
Tensor predict_proba(const Model& model, const Tensor& x, double temperature);
// Uses model.inference_temperature.
Tensor predict_proba(const Model& model, const Tensor& x);

int argmax_lowest(const Tensor& values);

// ---- training ----

struct TrainConfig {
  double learning_rate = 0.02;
  double momentum = 0.9;
  int batch_size = 8;
  int epochs = 30;
  std::uint64_t seed = 42;
  double temperature = 1.0;
};

// SGD with momentum on cross-entropy at cfg.temperature. Deterministic for a
// fixed seed: weight updates and epoch shuffles all derive from cfg.seed.
// Labels are hard unless soft_targets is nonempty, in which case the soft
// cross-entropy is used (defensive distillation's student phase). Throws if
// the loss turns non-finite. The returned model carries
// inference_temperature = cfg.temperature.
Model train(Model model, std::span<const Tensor> images,
            std::span<const int> labels, std::span<const Tensor> soft_targets,
            const TrainConfig& cfg);

}  // namespace advbench
