#include "liveguard/network.hpp"

#include <cmath>
#include <string>

namespace liveguard {

namespace {

double activate(Activation a, double x) {
  return a == Activation::Relu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

// Derivative expressed through the pre-activation value.
double activate_grad(Activation a, double pre) {
  if (a == Activation::Relu) return pre > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

Vector affine(const DenseLayer& layer, const Vector& x) {
  Vector y = matvec(layer.weight, x);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += layer.bias[i];
  return y;
}

}  // namespace

void MlpParams::validate() const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.bias.size() != l.weight.rows) {
      throw ShapeMismatch("layer " + std::to_string(i) + ": bias dim " +
                          std::to_string(l.bias.size()) + " vs weight rows " +
                          std::to_string(l.weight.rows));
    }
    if (i > 0 && layers[i - 1].weight.rows != l.weight.cols) {
      throw ShapeMismatch("layer " + std::to_string(i) + " input dim does not chain");
    }
  }
  if (head.weight.rows != 2 || head.bias.size() != 2) {
    throw ShapeMismatch("head must produce exactly 2 logits");
  }
  if (!layers.empty() && head.weight.cols != layers.back().weight.rows) {
    throw ShapeMismatch("head input dim does not match feature dim");
  }
}

MlpParams init_mlp(std::size_t input_dim, const NetworkSpec& spec,
                   std::mt19937_64& rng) {
  MlpParams params;
  params.activation = spec.activation;

  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  for (std::size_t h : spec.hidden_dims) dims.push_back(h);
  dims.push_back(spec.feature_dim);

  auto glorot = [&rng](std::size_t rows, std::size_t cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(rows, cols);
    for (double& v : w.data) v = dist(rng);
    return w;
  };

  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer layer;
    layer.weight = glorot(dims[i + 1], dims[i]);
    layer.bias = Vector(dims[i + 1], 0.0);
    params.layers.push_back(std::move(layer));
  }
  params.head.weight = glorot(2, spec.feature_dim);
  params.head.bias = Vector(2, 0.0);
  params.validate();
  return params;
}

ForwardTrace forward(const MlpParams& params, const Vector& x) {
  if (x.size() != params.input_dim()) {
    throw DimensionMismatch("forward: input dim " + std::to_string(x.size()) +
                            " vs network input dim " +
                            std::to_string(params.input_dim()));
  }
  ForwardTrace trace;
  trace.input = x;
  const Vector* current = &trace.input;
  for (const auto& layer : params.layers) {
    Vector pre = affine(layer, *current);
    Vector act(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) {
      act[i] = activate(params.activation, pre[i]);
    }
    trace.pre.push_back(std::move(pre));
    trace.act.push_back(std::move(act));
    current = &trace.act.back();
  }
  trace.z = *current;
  trace.logits = affine(params.head, trace.z);
  return trace;
}

Vector features(const MlpParams& params, const Vector& x) {
  if (x.size() != params.input_dim()) {
    throw DimensionMismatch("features: input dim mismatch");
  }
  Vector current = x;
  for (const auto& layer : params.layers) {
    Vector pre = affine(layer, current);
    for (double& v : pre) v = activate(params.activation, v);
    current = std::move(pre);
  }
  return current;
}

Vector head_logits(const MlpParams& params, const Vector& z) {
  if (z.size() != params.feature_dim()) {
    throw DimensionMismatch("head_logits: feature dim mismatch");
  }
  return affine(params.head, z);
}

MlpGrads backward(const MlpParams& params, const ForwardTrace& trace,
                  const Vector& d_logits, const Vector& d_z) {
  if (trace.pre.size() != params.layers.size() ||
      trace.act.size() != params.layers.size()) {
    throw ShapeMismatch("backward: trace does not match network depth");
  }
  if (d_logits.size() != 2 || d_z.size() != trace.z.size()) {
    throw ShapeMismatch("backward: cotangent dims do not match trace");
  }
  if (trace.input.size() != params.input_dim()) {
    throw ShapeMismatch("backward: trace input dim mismatch");
  }

  MlpGrads grads;
  grads.head.d_weight = outer(d_logits, trace.z);
  grads.head.d_bias = d_logits;

  // Feature cotangent: injected d_z plus the head's pullback.
  Vector g = d_z;
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] += params.head.weight(0, j) * d_logits[0] +
            params.head.weight(1, j) * d_logits[1];
  }

  grads.layers.resize(params.layers.size());
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& layer = params.layers[li];
    const Vector& pre = trace.pre[li];
    Vector g_pre(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) {
      g_pre[i] = g[i] * activate_grad(params.activation, pre[i]);
    }
    const Vector& layer_input = li == 0 ? trace.input : trace.act[li - 1];
    grads.layers[li].d_weight = outer(g_pre, layer_input);
    grads.layers[li].d_bias = g_pre;

    Vector g_next(layer.weight.cols, 0.0);
    for (std::size_t i = 0; i < layer.weight.rows; ++i) {
      const double gi = g_pre[i];
      if (gi == 0.0) continue;
      for (std::size_t j = 0; j < layer.weight.cols; ++j) {
        g_next[j] += layer.weight(i, j) * gi;
      }
    }
    g = std::move(g_next);
  }
  grads.d_input = std::move(g);
  return grads;
}

}  // namespace liveguard
