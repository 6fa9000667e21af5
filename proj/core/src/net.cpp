#include "advbench/net.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace advbench {

namespace {

std::atomic<std::uint64_t> g_gradient_calls{0};

struct Shape3 {
  std::size_t c = 0, h = 0, w = 0;
  std::size_t flat() const { return c * h * w; }
};

// Walks the layer stack and yields the activation shape entering each layer.
// Dense consumes the flattened activation, so only Conv3x3/MaxPool2 insist
// on a spatial layout.
std::vector<Shape3> trace_shapes(const Model& model) {
  std::vector<Shape3> shapes;
  Shape3 cur{model.in_channels, model.in_height, model.in_width};
  bool spatial = true;
  for (const Layer& layer : model.layers) {
    shapes.push_back(cur);
    switch (layer.kind) {
      case LayerKind::Conv3x3:
        if (!spatial)
          throw std::invalid_argument("Conv3x3 requires a spatial activation");
        cur.c = layer.weight.shape()[0];
        break;
      case LayerKind::MaxPool2:
        if (!spatial)
          throw std::invalid_argument("MaxPool2 requires a spatial activation");
        if (cur.h < 2 || cur.w < 2)
          throw std::invalid_argument("MaxPool2 input too small");
        cur.h /= 2;
        cur.w /= 2;
        break;
      case LayerKind::Flatten:
        cur = Shape3{cur.flat(), 1, 1};
        spatial = false;
        break;
      case LayerKind::Dense:
        cur = Shape3{layer.weight.shape()[0], 1, 1};
        spatial = false;
        break;
      case LayerKind::Relu:
        break;
    }
  }
  shapes.push_back(cur);
  return shapes;
}

Tensor conv3x3_forward(const Tensor& in, const Tensor& weight,
                       const Tensor& bias, const Shape3& s) {
  std::size_t out_c = weight.shape()[0];
  Tensor out({out_c, s.h, s.w});
  const double* wp = weight.data();
  for (std::size_t oc = 0; oc < out_c; ++oc) {
    double b = bias[oc];
    for (std::size_t y = 0; y < s.h; ++y) {
      for (std::size_t x = 0; x < s.w; ++x) {
        double acc = b;
        for (std::size_t ic = 0; ic < s.c; ++ic) {
          const double* wk = wp + ((oc * s.c + ic) * 9);
          const double* ip = in.data() + (ic * s.h) * s.w;
          for (std::size_t ky = 0; ky < 3; ++ky) {
            std::size_t iy = y + ky;
            if (iy < 1 || iy > s.h) continue;  // zero padding of 1
            iy -= 1;
            const double* row = ip + iy * s.w;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              std::size_t ix = x + kx;
              if (ix < 1 || ix > s.w) continue;
              acc += wk[ky * 3 + kx] * row[ix - 1];
            }
          }
        }
        out[(oc * s.h + y) * s.w + x] = acc;
      }
    }
  }
  return out;
}

void conv3x3_backward(const Tensor& in, const Tensor& weight,
                      const Tensor& dout, const Shape3& s, Tensor* din,
                      Tensor* dweight, Tensor* dbias) {
  std::size_t out_c = weight.shape()[0];
  for (std::size_t oc = 0; oc < out_c; ++oc) {
    for (std::size_t y = 0; y < s.h; ++y) {
      for (std::size_t x = 0; x < s.w; ++x) {
        double g = dout[(oc * s.h + y) * s.w + x];
        if (g == 0.0) continue;
        if (dbias) (*dbias)[oc] += g;
        for (std::size_t ic = 0; ic < s.c; ++ic) {
          const double* wk = weight.data() + ((oc * s.c + ic) * 9);
          double* dwk = dweight ? dweight->data() + ((oc * s.c + ic) * 9) : nullptr;
          for (std::size_t ky = 0; ky < 3; ++ky) {
            std::size_t iy = y + ky;
            if (iy < 1 || iy > s.h) continue;
            iy -= 1;
            for (std::size_t kx = 0; kx < 3; ++kx) {
              std::size_t ix = x + kx;
              if (ix < 1 || ix > s.w) continue;
              std::size_t src = (ic * s.h + iy) * s.w + (ix - 1);
              if (dwk) dwk[ky * 3 + kx] += g * in[src];
              if (din) (*din)[src] += g * wk[ky * 3 + kx];
            }
          }
        }
      }
    }
  }
}

}  // namespace

std::uint64_t gradient_call_count() { return g_gradient_calls.load(); }

void ParamGrads::accumulate(const ParamGrads& other, double scale) {
  for (std::size_t l = 0; l < dweight.size(); ++l) {
    for (std::size_t i = 0; i < dweight[l].size(); ++i)
      dweight[l][i] += scale * other.dweight[l][i];
    for (std::size_t i = 0; i < dbias[l].size(); ++i)
      dbias[l][i] += scale * other.dbias[l][i];
  }
}

Model build_model(std::size_t in_channels, std::size_t in_height,
                  std::size_t in_width, std::span<const LayerSpec> spec,
                  SplitMix64& rng) {
  if (spec.empty() || spec.back().kind != LayerKind::Dense)
    throw std::invalid_argument("build_model: last layer must be Dense");
  Model model;
  model.in_channels = in_channels;
  model.in_height = in_height;
  model.in_width = in_width;

  Shape3 cur{in_channels, in_height, in_width};
  for (const LayerSpec& ls : spec) {
    Layer layer;
    layer.kind = ls.kind;
    switch (ls.kind) {
      case LayerKind::Conv3x3: {
        if (ls.out == 0)
          throw std::invalid_argument("Conv3x3 needs a positive channel count");
        std::size_t fan_in = cur.c * 9, fan_out = ls.out * 9;
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        layer.weight = Tensor({ls.out, cur.c, 3, 3});
        for (double& v : layer.weight.values()) v = rng.uniform(-bound, bound);
        layer.bias = Tensor({ls.out});
        cur.c = ls.out;
        break;
      }
      case LayerKind::Dense: {
        if (ls.out == 0)
          throw std::invalid_argument("Dense needs a positive output width");
        std::size_t in_dim = cur.flat();
        double bound = std::sqrt(6.0 / static_cast<double>(in_dim + ls.out));
        layer.weight = Tensor({ls.out, in_dim});
        for (double& v : layer.weight.values()) v = rng.uniform(-bound, bound);
        layer.bias = Tensor({ls.out});
        cur = Shape3{ls.out, 1, 1};
        break;
      }
      case LayerKind::MaxPool2:
        if (cur.h < 2 || cur.w < 2)
          throw std::invalid_argument("MaxPool2 input too small");
        cur.h /= 2;
        cur.w /= 2;
        break;
      case LayerKind::Flatten:
        cur = Shape3{cur.flat(), 1, 1};
        break;
      case LayerKind::Relu:
        break;
    }
    model.layers.push_back(std::move(layer));
  }
  model.num_classes = model.layers.back().weight.shape()[0];
  return model;
}

Model reference_model(std::size_t num_classes, SplitMix64& rng,
                      std::size_t width_divisor) {
  if (width_divisor == 0) throw std::invalid_argument("width_divisor must be positive");
  auto width = [&](std::size_t w) { return std::max<std::size_t>(1, w / width_divisor); };
  const LayerSpec spec[] = {
      {LayerKind::Conv3x3, width(8)},  {LayerKind::Relu, 0},
      {LayerKind::MaxPool2, 0},        {LayerKind::Conv3x3, width(16)},
      {LayerKind::Relu, 0},            {LayerKind::MaxPool2, 0},
      {LayerKind::Flatten, 0},         {LayerKind::Dense, width(64)},
      {LayerKind::Relu, 0},            {LayerKind::Dense, num_classes},
  };
  return build_model(1, 28, 28, spec, rng);
}

namespace {

void check_input_shape(const Model& model, const Tensor& x) {
  std::size_t expected = model.in_channels * model.in_height * model.in_width;
  if (x.size() != expected)
    throw std::invalid_argument("forward: input has " + std::to_string(x.size()) +
                                " elements, model expects " + std::to_string(expected));
  if (x.rank() == 3) {
    if (x.shape()[0] != model.in_channels || x.shape()[1] != model.in_height ||
        x.shape()[2] != model.in_width)
      throw std::invalid_argument("forward: input shape mismatch");
  } else if (x.rank() != 1) {
    throw std::invalid_argument("forward: input must be rank 1 or rank 3");
  }
}

}  // namespace

ForwardTrace forward_trace(const Model& model, const Tensor& x) {
  check_input_shape(model, x);
  std::vector<Shape3> shapes = trace_shapes(model);

  ForwardTrace trace;
  trace.inputs.reserve(model.layers.size());
  trace.pool_src.resize(model.layers.size());

  Tensor cur = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    const Shape3& s = shapes[l];
    trace.inputs.push_back(cur);
    switch (layer.kind) {
      case LayerKind::Conv3x3:
        cur = conv3x3_forward(cur, layer.weight, layer.bias, s);
        break;
      case LayerKind::Relu: {
        Tensor out = cur;
        for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
        cur = std::move(out);
        break;
      }
      case LayerKind::MaxPool2: {
        std::size_t oh = s.h / 2, ow = s.w / 2;
        Tensor out({s.c, oh, ow});
        auto& src = trace.pool_src[l];
        src.resize(s.c * oh * ow);
        for (std::size_t c = 0; c < s.c; ++c)
          for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x2 = 0; x2 < ow; ++x2) {
              std::size_t best_idx = (c * s.h + 2 * y) * s.w + 2 * x2;
              double best = cur[best_idx];
              for (std::size_t dy = 0; dy < 2; ++dy)
                for (std::size_t dx = 0; dx < 2; ++dx) {
                  std::size_t idx = (c * s.h + 2 * y + dy) * s.w + (2 * x2 + dx);
                  if (cur[idx] > best) {
                    best = cur[idx];
                    best_idx = idx;
                  }
                }
              out[(c * oh + y) * ow + x2] = best;
              src[(c * oh + y) * ow + x2] = best_idx;
            }
        cur = std::move(out);
        break;
      }
      case LayerKind::Flatten:
        cur = Tensor({cur.size()}, cur.values());
        break;
      case LayerKind::Dense: {
        std::size_t out_dim = layer.weight.shape()[0];
        std::size_t in_dim = layer.weight.shape()[1];
        Tensor out({out_dim});
        const double* wp = layer.weight.data();
        for (std::size_t o = 0; o < out_dim; ++o) {
          double acc = layer.bias[o];
          const double* row = wp + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * cur[i];
          out[o] = acc;
        }
        cur = std::move(out);
        break;
      }
    }
  }
  trace.logits = std::move(cur);
  return trace;
}

Tensor forward(const Model& model, const Tensor& x) {
  return forward_trace(model, x).logits;
}

void backward(const Model& model, const ForwardTrace& trace,
              const Tensor& dlogits, Tensor* dinput, ParamGrads* dparams) {
  g_gradient_calls.fetch_add(1, std::memory_order_relaxed);
  if (dlogits.size() != model.num_classes)
    throw std::invalid_argument("backward: gradient seed has wrong length");
  std::vector<Shape3> shapes = trace_shapes(model);

  if (dparams) {
    dparams->dweight.assign(model.layers.size(), Tensor());
    dparams->dbias.assign(model.layers.size(), Tensor());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      if (model.layers[l].has_params()) {
        dparams->dweight[l] = Tensor(model.layers[l].weight.shape());
        dparams->dbias[l] = Tensor(model.layers[l].bias.shape());
      }
    }
  }

  Tensor grad = dlogits;
  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const Layer& layer = model.layers[li];
    const Tensor& in = trace.inputs[li];
    const Shape3& s = shapes[li];
    switch (layer.kind) {
      case LayerKind::Dense: {
        std::size_t out_dim = layer.weight.shape()[0];
        std::size_t in_dim = layer.weight.shape()[1];
        if (dparams) {
          Tensor& dw = dparams->dweight[li];
          Tensor& db = dparams->dbias[li];
          for (std::size_t o = 0; o < out_dim; ++o) {
            double g = grad[o];
            db[o] += g;
            double* dwrow = dw.data() + o * in_dim;
            for (std::size_t i = 0; i < in_dim; ++i) dwrow[i] += g * in[i];
          }
        }
        Tensor din({in_dim});
        const double* wp = layer.weight.data();
        for (std::size_t o = 0; o < out_dim; ++o) {
          double g = grad[o];
          if (g == 0.0) continue;
          const double* row = wp + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) din[i] += g * row[i];
        }
        grad = std::move(din);
        break;
      }
      case LayerKind::Flatten: {
        grad = Tensor(in.shape(), grad.values());
        break;
      }
      case LayerKind::MaxPool2: {
        Tensor din(in.shape());
        const auto& src = trace.pool_src[li];
        for (std::size_t i = 0; i < grad.size(); ++i) din[src[i]] += grad[i];
        grad = std::move(din);
        break;
      }
      case LayerKind::Relu: {
        Tensor din = grad;
        for (std::size_t i = 0; i < din.size(); ++i)
          if (in[i] <= 0.0) din[i] = 0.0;
        grad = std::move(din);
        break;
      }
      case LayerKind::Conv3x3: {
        Tensor din(in.shape());
        conv3x3_backward(in, layer.weight, grad, s, &din,
                         dparams ? &dparams->dweight[li] : nullptr,
                         dparams ? &dparams->dbias[li] : nullptr);
        grad = std::move(din);
        break;
      }
    }
  }
  if (dinput) *dinput = std::move(grad);
}

Tensor softmax_t(const Tensor& logits, double temperature) {
  if (temperature <= 0.0)
    throw std::invalid_argument("softmax_t: temperature must be positive");
  if (logits.empty()) throw std::invalid_argument("softmax_t: empty logits");
  double mx = logits[0];
  for (double v : logits.values()) mx = std::max(mx, v);
  Tensor out = logits;
  double sum = 0.0;
  for (double& v : out.values()) {
    v = std::exp((v - mx) / temperature);
    sum += v;
  }
  for (double& v : out.values()) v /= sum;
  return out;
}

namespace {

double log_sum_exp(const Tensor& logits, double temperature) {
  double mx = logits[0];
  for (double v : logits.values()) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits.values()) sum += std::exp((v - mx) / temperature);
  return mx / temperature + std::log(sum);
}

void check_label(const Tensor& logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw std::invalid_argument("label out of range");
}

void check_soft_target(const Tensor& logits, const Tensor& target) {
  if (target.size() != logits.size())
    throw std::invalid_argument("soft target length mismatch");
  double sum = 0.0;
  for (double v : target.values()) sum += v;
  if (std::fabs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("soft target must sum to 1");
}

}  // namespace

double cross_entropy(const Tensor& logits, int label, double temperature) {
  if (temperature <= 0.0)
    throw std::invalid_argument("cross_entropy: temperature must be positive");
  check_label(logits, label);
  return log_sum_exp(logits, temperature) -
         logits[static_cast<std::size_t>(label)] / temperature;
}

double cross_entropy(const Tensor& logits, const Tensor& soft_target,
                     double temperature) {
  if (temperature <= 0.0)
    throw std::invalid_argument("cross_entropy: temperature must be positive");
  check_soft_target(logits, soft_target);
  double lse = log_sum_exp(logits, temperature);
  double dot = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    dot += soft_target[i] * logits[i] / temperature;
  return lse - dot;
}

Tensor ce_logit_gradient(const Tensor& logits, int label, double temperature) {
  check_label(logits, label);
  Tensor g = softmax_t(logits, temperature);
  g[static_cast<std::size_t>(label)] -= 1.0;
  for (double& v : g.values()) v /= temperature;
  return g;
}

Tensor ce_logit_gradient(const Tensor& logits, const Tensor& soft_target,
                         double temperature) {
  check_soft_target(logits, soft_target);
  Tensor g = softmax_t(logits, temperature);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (g[i] - soft_target[i]) / temperature;
  return g;
}

Tensor input_gradient(const Model& model, const Tensor& x, int label,
                      double temperature) {
  ForwardTrace trace = forward_trace(model, x);
  Tensor dlogits = ce_logit_gradient(trace.logits, label, temperature);
  Tensor dx;
  backward(model, trace, dlogits, &dx, nullptr);
  return dx;
}

Tensor input_gradient(const Model& model, const Tensor& x,
                      const Tensor& soft_target, double temperature) {
  ForwardTrace trace = forward_trace(model, x);
  Tensor dlogits = ce_logit_gradient(trace.logits, soft_target, temperature);
  Tensor dx;
  backward(model, trace, dlogits, &dx, nullptr);
  return dx;
}

Tensor input_gradient_from_logits(const Model& model, const Tensor& x,
                                  const Tensor& dlogits) {
  ForwardTrace trace = forward_trace(model, x);
  Tensor dx;
  backward(model, trace, dlogits, &dx, nullptr);
  return dx;
}

namespace {

template <typename TargetAt>
ParamGrads batch_param_gradients(const Model& model,
                                 std::span<const Tensor> batch,
                                 TargetAt&& target_at) {
  if (batch.empty()) throw std::invalid_argument("param_gradients: empty batch");
  ParamGrads total;
  total.dweight.assign(model.layers.size(), Tensor());
  total.dbias.assign(model.layers.size(), Tensor());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (model.layers[l].has_params()) {
      total.dweight[l] = Tensor(model.layers[l].weight.shape());
      total.dbias[l] = Tensor(model.layers[l].bias.shape());
    }
  }
  double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ForwardTrace trace = forward_trace(model, batch[i]);
    Tensor dlogits = target_at(trace.logits, i);
    ParamGrads sample;
    backward(model, trace, dlogits, nullptr, &sample);
    total.accumulate(sample, scale);
  }
  return total;
}

}  // namespace

ParamGrads param_gradients(const Model& model, std::span<const Tensor> batch,
                           std::span<const int> labels, double temperature) {
  if (labels.size() != batch.size())
    throw std::invalid_argument("param_gradients: label count mismatch");
  return batch_param_gradients(model, batch,
                               [&](const Tensor& logits, std::size_t i) {
                                 return ce_logit_gradient(logits, labels[i],
                                                          temperature);
                               });
}

ParamGrads param_gradients(const Model& model, std::span<const Tensor> batch,
                           std::span<const Tensor> soft_targets,
                           double temperature) {
  if (soft_targets.size() != batch.size())
    throw std::invalid_argument("param_gradients: target count mismatch");
  return batch_param_gradients(model, batch,
                               [&](const Tensor& logits, std::size_t i) {
                                 return ce_logit_gradient(
                                     logits, soft_targets[i], temperature);
                               });
}

int argmax_lowest(const Tensor& values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<int>(best);
}

int predict(const Model& model, const Tensor& x) {
  return argmax_lowest(forward(model, x));
}

Tensor predict_proba(const Model& model, const Tensor& x, double temperature) {
  return softmax_t(forward(model, x), temperature);
}

Tensor predict_proba(const Model& model, const Tensor& x) {
  return predict_proba(model, x, model.inference_temperature);
}

}  // namespace advbench
