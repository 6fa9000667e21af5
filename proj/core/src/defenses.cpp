#include "advbench/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advbench {

namespace {

// Mirror about the edge pixel (the edge itself is not repeated):
// -1 -> 1, -2 -> 2, n -> n-2.
std::size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

std::size_t clamp_index(long i, long n) {
  return static_cast<std::size_t>(std::clamp<long>(i, 0, n - 1));
}

struct Dims {
  std::size_t c, h, w;
};

Dims image_dims(const Tensor& x, const char* op) {
  if (x.rank() == 2) return {1, x.shape()[0], x.shape()[1]};
  if (x.rank() == 3) return {x.shape()[0], x.shape()[1], x.shape()[2]};
  throw std::invalid_argument(std::string(op) + ": expected a 2-D or 3-D tensor");
}

void require_odd(int value, const char* name, const char* op) {
  if (value < 1 || value % 2 == 0)
    throw std::invalid_argument(std::string(op) + ": " + name +
                                " must be odd and positive");
}

using PadFn = std::size_t (*)(long, long);

Tensor window_median(const Tensor& x, int window, PadFn pad, const char* op) {
  require_odd(window, "window", op);
  Dims d = image_dims(x, op);
  int r = window / 2;
  Tensor out = x;
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(window) * window);
  for (std::size_t c = 0; c < d.c; ++c) {
    const double* in = x.data() + c * d.h * d.w;
    double* dst = out.data() + c * d.h * d.w;
    for (std::size_t y = 0; y < d.h; ++y) {
      for (std::size_t xx = 0; xx < d.w; ++xx) {
        vals.clear();
        for (int dy = -r; dy <= r; ++dy) {
          std::size_t sy = pad(static_cast<long>(y) + dy, static_cast<long>(d.h));
          for (int dx = -r; dx <= r; ++dx) {
            std::size_t sx = pad(static_cast<long>(xx) + dx, static_cast<long>(d.w));
            vals.push_back(in[sy * d.w + sx]);
          }
        }
        auto mid = vals.begin() + static_cast<long>(vals.size() / 2);
        std::nth_element(vals.begin(), mid, vals.end());
        dst[y * d.w + xx] = *mid;
      }
    }
  }
  return out;
}

Tensor separable_convolve(const Tensor& x, const std::vector<double>& kernel,
                          const char* op) {
  Dims d = image_dims(x, op);
  int r = static_cast<int>(kernel.size() / 2);
  Tensor tmp = x;
  Tensor out = x;
  for (std::size_t c = 0; c < d.c; ++c) {
    const double* in = x.data() + c * d.h * d.w;
    double* mid = tmp.data() + c * d.h * d.w;
    double* dst = out.data() + c * d.h * d.w;
    // horizontal pass
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t xx = 0; xx < d.w; ++xx) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          std::size_t sx = reflect_index(static_cast<long>(xx) + k,
                                         static_cast<long>(d.w));
          acc += kernel[static_cast<std::size_t>(k + r)] * in[y * d.w + sx];
        }
        mid[y * d.w + xx] = acc;
      }
    // vertical pass
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t xx = 0; xx < d.w; ++xx) {
        double acc = 0.0;
        for (int k = -r; k <= r; ++k) {
          std::size_t sy = reflect_index(static_cast<long>(y) + k,
                                         static_cast<long>(d.h));
          acc += kernel[static_cast<std::size_t>(k + r)] * mid[sy * d.w + xx];
        }
        dst[y * d.w + xx] = acc;
      }
  }
  return out;
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  if (radius < 0) throw std::invalid_argument("gaussian_kernel: radius must be non-negative");
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

double gaussian_blur_sigma(int kernel_size) {
  return 0.3 * ((kernel_size - 1) / 2.0 - 1.0) + 0.8;
}

Tensor median_filter(const Tensor& x, int window) {
  return window_median(x, window, reflect_index, "median_filter");
}

Tensor spatial_smooth(const Tensor& x, int window) {
  return window_median(x, window, clamp_index, "spatial_smooth");
}

Tensor gaussian_smooth(const Tensor& x, double sigma) {
  if (sigma <= 0.0)
    throw std::invalid_argument("gaussian_smooth: sigma must be positive");
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  return separable_convolve(x, gaussian_kernel(sigma, radius), "gaussian_smooth");
}

Tensor gaussian_blur(const Tensor& x, int kernel_size) {
  require_odd(kernel_size, "kernel_size", "gaussian_blur");
  int radius = kernel_size / 2;
  if (radius == 0) return x;
  return separable_convolve(x, gaussian_kernel(gaussian_blur_sigma(kernel_size), radius),
                            "gaussian_blur");
}

Tensor bilateral_filter(const Tensor& x, int diameter, double sigma_color,
                        double sigma_space) {
  require_odd(diameter, "diameter", "bilateral_filter");
  if (sigma_color <= 0.0 || sigma_space <= 0.0)
    throw std::invalid_argument("bilateral_filter: sigmas must be positive");
  Dims d = image_dims(x, "bilateral_filter");
  int r = diameter / 2;

  std::vector<double> spatial(static_cast<std::size_t>(diameter) * diameter);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      spatial[static_cast<std::size_t>(dy + r) * diameter + (dx + r)] =
          std::exp(-(static_cast<double>(dy) * dy + static_cast<double>(dx) * dx) /
                   (2.0 * sigma_space * sigma_space));

  double inv_color = 1.0 / (2.0 * sigma_color * sigma_color);
  Tensor out = x;
  for (std::size_t c = 0; c < d.c; ++c) {
    const double* in = x.data() + c * d.h * d.w;
    double* dst = out.data() + c * d.h * d.w;
    for (std::size_t y = 0; y < d.h; ++y) {
      for (std::size_t xx = 0; xx < d.w; ++xx) {
        double center = in[y * d.w + xx];
        double acc = 0.0, wsum = 0.0;
        for (int dy = -r; dy <= r; ++dy) {
          std::size_t sy = reflect_index(static_cast<long>(y) + dy,
                                         static_cast<long>(d.h));
          for (int dx = -r; dx <= r; ++dx) {
            std::size_t sx = reflect_index(static_cast<long>(xx) + dx,
                                           static_cast<long>(d.w));
            double v = in[sy * d.w + sx];
            double diff = v - center;
            double w = spatial[static_cast<std::size_t>(dy + r) * diameter + (dx + r)] *
                       std::exp(-diff * diff * inv_color);
            acc += w * v;
            wsum += w;
          }
        }
        dst[y * d.w + xx] = acc / wsum;
      }
    }
  }
  return out;
}

double total_variation(const Tensor& u) {
  if (u.rank() != 2) throw std::invalid_argument("total_variation: expected rank 2");
  std::size_t h = u.shape()[0], w = u.shape()[1];
  double tv = 0.0;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double gx = (y + 1 < h) ? u.at(y + 1, x) - u.at(y, x) : 0.0;
      double gy = (x + 1 < w) ? u.at(y, x + 1) - u.at(y, x) : 0.0;
      tv += std::sqrt(gx * gx + gy * gy);
    }
  return tv;
}

double rof_energy(const Tensor& u, const Tensor& x, double tv_weight) {
  if (!u.same_shape(x)) throw std::invalid_argument("rof_energy: shape mismatch");
  double fidelity = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = u[i] - x[i];
    fidelity += d * d;
  }
  return 0.5 * fidelity + tv_weight * total_variation(u);
}

namespace {

// Chambolle's dual projection for one channel: u = f - lambda * div p with
// p updated by a semi-implicit step of size tau = 0.25. The dual field rows
// p1[h-1][*] and columns p2[*][w-1] stay zero because the forward-difference
// gradient vanishes there.
void chambolle_channel(const double* f, double* u, std::size_t h, std::size_t w,
                       double lambda, int iters) {
  constexpr double kTau = 0.25;
  std::vector<double> p1(h * w, 0.0), p2(h * w, 0.0), div_p(h * w, 0.0);
  for (int it = 0; it < iters; ++it) {
    // s = div p - f / lambda, then w_vec = grad s.
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double v = p1[y * w + x] + p2[y * w + x];
        if (y > 0) v -= p1[(y - 1) * w + x];
        if (x > 0) v -= p2[y * w + x - 1];
        div_p[y * w + x] = v;
      }
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        std::size_t i = y * w + x;
        double s = div_p[i] - f[i] / lambda;
        double g1 = (y + 1 < h)
                        ? (div_p[(y + 1) * w + x] - f[(y + 1) * w + x] / lambda) - s
                        : 0.0;
        double g2 = (x + 1 < w)
                        ? (div_p[y * w + x + 1] - f[y * w + x + 1] / lambda) - s
                        : 0.0;
        double mag = std::sqrt(g1 * g1 + g2 * g2);
        double denom = 1.0 + kTau * mag;
        p1[i] = (p1[i] + kTau * g1) / denom;
        p2[i] = (p2[i] + kTau * g2) / denom;
      }
  }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double v = p1[y * w + x] + p2[y * w + x];
      if (y > 0) v -= p1[(y - 1) * w + x];
      if (x > 0) v -= p2[y * w + x - 1];
      u[y * w + x] = f[y * w + x] - lambda * v;
    }
}

}  // namespace

Tensor tv_denoise(const Tensor& x, double tv_weight, int tv_iters) {
  if (tv_weight < 0.0)
    throw std::invalid_argument("tv_denoise: tv_weight must be non-negative");
  if (tv_iters < 0)
    throw std::invalid_argument("tv_denoise: tv_iters must be non-negative");
  if (tv_weight == 0.0 || tv_iters == 0) return x;
  Dims d = image_dims(x, "tv_denoise");
  Tensor out = x;
  for (std::size_t c = 0; c < d.c; ++c)
    chambolle_channel(x.data() + c * d.h * d.w, out.data() + c * d.h * d.w, d.h,
                      d.w, tv_weight, tv_iters);
  return out;
}

Tensor feature_squeeze(const Tensor& x, int bit_depth) {
  if (bit_depth < 1 || bit_depth > 8)
    throw std::invalid_argument("feature_squeeze: bit_depth must be in [1, 8]");
  double levels = static_cast<double>((1 << bit_depth) - 1);
  Tensor out = x;
  for (double& v : out.values()) v = std::round(v * levels) / levels;
  return out;
}

DefenseFamily parse_defense_family(const std::string& name) {
  if (name == "median") return DefenseFamily::Median;
  if (name == "gaussian_smooth") return DefenseFamily::GaussianSmooth;
  if (name == "gaussian_blur") return DefenseFamily::GaussianBlur;
  if (name == "bilateral") return DefenseFamily::Bilateral;
  if (name == "tv_denoise") return DefenseFamily::TvDenoise;
  if (name == "spatial_smooth") return DefenseFamily::SpatialSmooth;
  if (name == "feature_squeeze") return DefenseFamily::FeatureSqueeze;
  if (name == "distill") return DefenseFamily::Distill;
  throw std::invalid_argument("unknown defense family \"" + name + "\"");
}

std::string defense_family_name(DefenseFamily family) {
  switch (family) {
    case DefenseFamily::Median: return "median";
    case DefenseFamily::GaussianSmooth: return "gaussian_smooth";
    case DefenseFamily::GaussianBlur: return "gaussian_blur";
    case DefenseFamily::Bilateral: return "bilateral";
    case DefenseFamily::TvDenoise: return "tv_denoise";
    case DefenseFamily::SpatialSmooth: return "spatial_smooth";
    case DefenseFamily::FeatureSqueeze: return "feature_squeeze";
    case DefenseFamily::Distill: return "distill";
  }
  return "?";
}

Tensor apply_defense(const DefenseSpec& spec, const Tensor& x) {
  switch (spec.family) {
    case DefenseFamily::Median:
      return clip01(median_filter(x, spec.window));
    case DefenseFamily::GaussianSmooth:
      return clip01(gaussian_smooth(x, spec.sigma));
    case DefenseFamily::GaussianBlur:
      return clip01(gaussian_blur(x, spec.kernel_size));
    case DefenseFamily::Bilateral:
      return clip01(bilateral_filter(x, spec.diameter, spec.sigma_color,
                                     spec.sigma_space));
    case DefenseFamily::TvDenoise:
      return clip01(tv_denoise(x, spec.tv_weight, spec.tv_iters));
    case DefenseFamily::SpatialSmooth:
      return clip01(spatial_smooth(x, spec.window));
    case DefenseFamily::FeatureSqueeze:
      return feature_squeeze(x, spec.bit_depth);
    case DefenseFamily::Distill:
      throw std::invalid_argument(
          "distill is not a preprocessing defense; it is applied by the harness");
  }
  throw std::invalid_argument("apply_defense: unknown family");
}

}  // namespace advbench
