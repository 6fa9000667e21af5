#pragma once

#include <string>
#include <vector>

#include "advbench/datagen.hpp"
#include "advbench/net.hpp"
#include "advbench/rng.hpp"
#include "advbench/tensor.hpp"

namespace advbench {

// Preprocessing defenses work per channel on [C,H,W] tensors, preserve the
// shape and the [0,1] range, and are pure functions.

enum class DefenseFamily {
  Median,
  GaussianSmooth,
  GaussianBlur,
  Bilateral,
  TvDenoise,
  SpatialSmooth,
  FeatureSqueeze,
  Distill,
};

struct DefenseSpec {
  DefenseFamily family = DefenseFamily::Median;
  int window = 3;            // median / spatial_smooth (odd)
  double sigma = 1.0;        // gaussian_smooth
  int kernel_size = 5;       // gaussian_blur (odd)
  int diameter = 9;          // bilateral (odd)
  double sigma_color = 0.3;  // bilateral, in [0,1] intensity units
  double sigma_space = 3.0;  // bilateral
  double tv_weight = 0.1;    // tv_denoise
  int tv_iters = 50;         // tv_denoise
  int bit_depth = 4;         // feature_squeeze, 1..8
  double temperature = 20.0; // distill
};

DefenseFamily parse_defense_family(const std::string& name);
std::string defense_family_name(DefenseFamily family);

// Dispatch for the preprocessing families. Distill is not a preprocessing
// transform and is rejected here; the harness handles it separately.
Tensor apply_defense(const DefenseSpec& spec, const Tensor& x);

// Sliding-window median, reflect padding (mirror about the edge pixel).
Tensor median_filter(const Tensor& x, int window);

// Separable Gaussian convolution, kernel radius ceil(3*sigma), reflect
// padding.
Tensor gaussian_smooth(const Tensor& x, double sigma);

// Fixed-size Gaussian kernel with sigma = 0.3*((kernel_size-1)/2 - 1) + 0.8.
Tensor gaussian_blur(const Tensor& x, int kernel_size);

// Normalized 1-D Gaussian weights for the given radius; exposed for tests
// and for the blur/smooth implementations.
std::vector<double> gaussian_kernel(double sigma, int radius);
double gaussian_blur_sigma(int kernel_size);

// Joint spatial/range filter over a diameter x diameter neighborhood,
// weights exp(-d^2/2s_s^2) * exp(-(Ip-Iq)^2/2s_c^2), renormalized per pixel.
Tensor bilateral_filter(const Tensor& x, int diameter, double sigma_color,
                        double sigma_space);

// ROF model min_u ||u-x||^2/2 + w*TV(u), solved per channel by Chambolle's
// dual projection iteration with step 0.25. w = 0 returns x unchanged.
Tensor tv_denoise(const Tensor& x, double tv_weight, int tv_iters);

// Isotropic total variation (forward differences); used by the energy
// monitoring tests and exposed for reuse.
double total_variation(const Tensor& channel_2d);
double rof_energy(const Tensor& u, const Tensor& x, double tv_weight);

// Sliding-window median with replicate (edge-clamp) padding. Interior pixels
// match median_filter; only the border treatment differs.
Tensor spatial_smooth(const Tensor& x, int window);

// Bit-depth reduction: round(x*(2^b-1))/(2^b-1), half away from zero.
Tensor feature_squeeze(const Tensor& x, int bit_depth);

// ---- defensive distillation ----

struct DistillConfig {
  TrainConfig teacher_train;
  double temperature = 20.0;
  // > 1 trains a student with every hidden width divided by this factor;
  // the default keeps the teacher architecture.
  std::size_t student_width_divisor = 1;
};

struct DistillResult {
  Model teacher;
  Model student;  // inference_temperature forced to 1.0
};

// (1) trains the teacher at cfg.temperature on hard labels, (2) computes the
// teacher's temperature-softened probabilities over the training set,
// (3) trains a fresh student on those soft targets at the same temperature,
// (4) returns the student with inference_temperature = 1. Deterministic
// given (cfg, rng state).
DistillResult distill(const Dataset& train_data, const DistillConfig& cfg,
                      SplitMix64& rng);

}  // namespace advbench
