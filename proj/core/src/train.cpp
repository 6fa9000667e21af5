#include <cmath>
#include <stdexcept>
#include <string>

#include "advbench/net.hpp"

namespace advbench {

namespace {

void validate(const TrainConfig& cfg) {
  if (cfg.learning_rate <= 0.0)
    throw std::invalid_argument("train: learning_rate must be positive");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("train: batch_size must be at least 1");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
  if (cfg.temperature <= 0.0)
    throw std::invalid_argument("train: temperature must be positive");
}

}  // namespace

Model train(Model model, std::span<const Tensor> images,
            std::span<const int> labels, std::span<const Tensor> soft_targets,
            const TrainConfig& cfg) {
  validate(cfg);
  if (images.empty()) throw std::invalid_argument("train: dataset is empty");
  bool soft = !soft_targets.empty();
  if (soft && soft_targets.size() != images.size())
    throw std::invalid_argument("train: soft target count mismatch");
  if (!soft && labels.size() != images.size())
    throw std::invalid_argument("train: label count mismatch");
  if (!soft) {
    for (int label : labels)
      if (label < 0 || static_cast<std::size_t>(label) >= model.num_classes)
        throw std::invalid_argument("train: label out of range");
  }

  ParamGrads velocity;
  velocity.dweight.assign(model.layers.size(), Tensor());
  velocity.dbias.assign(model.layers.size(), Tensor());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (model.layers[l].has_params()) {
      velocity.dweight[l] = Tensor(model.layers[l].weight.shape());
      velocity.dbias[l] = Tensor(model.layers[l].bias.shape());
    }
  }

  SplitMix64 rng(cfg.seed);
  std::size_t n = images.size();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = rng.permutation(n);
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Tensor> batch;
      std::vector<int> batch_labels;
      std::vector<Tensor> batch_soft;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(images[order[k]]);
        if (soft)
          batch_soft.push_back(soft_targets[order[k]]);
        else
          batch_labels.push_back(labels[order[k]]);
      }

      double batch_loss = 0.0;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        Tensor logits = forward(model, batch[k]);
        batch_loss += soft ? cross_entropy(logits, batch_soft[k], cfg.temperature)
                           : cross_entropy(logits, batch_labels[k], cfg.temperature);
      }
      batch_loss /= static_cast<double>(batch.size());
      if (!std::isfinite(batch_loss))
        throw std::runtime_error(
            "train: non-finite loss at epoch " + std::to_string(epoch) +
            ", batch starting at " + std::to_string(start) +
            " (learning_rate=" + std::to_string(cfg.learning_rate) + ")");

      ParamGrads grads =
          soft ? param_gradients(model, batch, std::span<const Tensor>(batch_soft),
                                 cfg.temperature)
               : param_gradients(model, batch, std::span<const int>(batch_labels),
                                 cfg.temperature);

      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        if (!model.layers[l].has_params()) continue;
        Tensor& vw = velocity.dweight[l];
        Tensor& vb = velocity.dbias[l];
        for (std::size_t i = 0; i < vw.size(); ++i) {
          vw[i] = cfg.momentum * vw[i] + grads.dweight[l][i];
          model.layers[l].weight[i] -= cfg.learning_rate * vw[i];
        }
        for (std::size_t i = 0; i < vb.size(); ++i) {
          vb[i] = cfg.momentum * vb[i] + grads.dbias[l][i];
          model.layers[l].bias[i] -= cfg.learning_rate * vb[i];
        }
      }
    }
  }

  for (const Layer& layer : model.layers) {
    if (!layer.has_params()) continue;
    for (double v : layer.weight.values())
      if (!std::isfinite(v)) throw std::runtime_error("train: non-finite weight after training");
    for (double v : layer.bias.values())
      if (!std::isfinite(v)) throw std::runtime_error("train: non-finite bias after training");
  }

  model.inference_temperature = cfg.temperature;
  return model;
}

}  // namespace advbench
