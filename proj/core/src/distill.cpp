#include <cmath>
#include <stdexcept>
#include <vector>

#include "advbench/defenses.hpp"

namespace advbench {

DistillResult distill(const Dataset& train_data, const DistillConfig& cfg,
                      SplitMix64& rng) {
  if (cfg.temperature <= 0.0)
    throw std::invalid_argument("distill: temperature must be positive");
  if (train_data.size() == 0)
    throw std::invalid_argument("distill: empty training set");

  std::vector<Tensor> images;
  images.reserve(train_data.size());
  for (std::size_t i = 0; i < train_data.size(); ++i)
    images.push_back(image_at(train_data, i));

  // Teacher: hard labels at the distillation temperature. Temperature-T
  // cross-entropy shrinks the logit gradients (by 1/T early on) and the
  // logits themselves must grow ~T times larger for the same confidence, so
  // both phases train with the learning rate scaled by sqrt(T) and twice
  // the epochs of the base recipe.
  SplitMix64 teacher_rng = rng.fork(0);
  Model teacher = reference_model(static_cast<std::size_t>(train_data.num_classes),
                                  teacher_rng);
  TrainConfig teacher_cfg = cfg.teacher_train;
  teacher_cfg.temperature = cfg.temperature;
  teacher_cfg.learning_rate =
      cfg.teacher_train.learning_rate * std::sqrt(cfg.temperature);
  teacher_cfg.epochs = cfg.teacher_train.epochs * 2;
  teacher = train(std::move(teacher), images, train_data.labels, {}, teacher_cfg);

  // Soft targets: the teacher's temperature-softened class probabilities.
  std::vector<Tensor> soft_targets;
  soft_targets.reserve(images.size());
  for (const Tensor& img : images)
    soft_targets.push_back(softmax_t(forward(teacher, img), cfg.temperature));

  // Student: fresh init, soft cross-entropy at the same temperature.
  SplitMix64 student_rng = rng.fork(1);
  Model student = reference_model(static_cast<std::size_t>(train_data.num_classes),
                                  student_rng, cfg.student_width_divisor);
  TrainConfig student_cfg = teacher_cfg;
  student_cfg.seed = teacher_cfg.seed + 1;
  student = train(std::move(student), images, {}, soft_targets, student_cfg);
  student.inference_temperature = 1.0;

  return DistillResult{std::move(teacher), std::move(student)};
}

}  // namespace advbench
