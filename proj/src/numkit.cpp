#include "remvc/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "remvc/errors.hpp"

namespace remvc {

double dot(std::span<const double> a, std::span<const double> b) {
  // Four fixed lanes: vectorizes without reassociation flags and the
  // summation order stays the same from run to run.
  const std::size_t n = a.size();
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

namespace {

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

Dense glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw ShapeError("glorot_init: dimensions must be positive");
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Dense w(rows, cols);
  for (auto& x : w.data) x = dist(rng);
  return w;
}

MlpParams make_mlp(std::span<const std::size_t> widths, Rng& rng) {
  if (widths.size() < 2) throw ShapeError("make_mlp: need at least input and output width");
  MlpParams p;
  for (std::size_t t = 0; t + 1 < widths.size(); ++t) {
    Layer layer;
    layer.weight = glorot_init(widths[t + 1], widths[t], rng);
    layer.bias.assign(widths[t + 1], 0.0);
    layer.activation = (t + 2 == widths.size()) ? Activation::identity : Activation::relu;
    p.layers.push_back(std::move(layer));
  }
  return p;
}

MlpParams zeros_like(const MlpParams& like) {
  MlpParams z = like;
  for (auto& layer : z.layers) {
    std::fill(layer.weight.data.begin(), layer.weight.data.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  return z;
}

void check_chain(const MlpParams& params) {
  if (params.layers.empty()) throw ShapeError("mlp has no layers");
  for (std::size_t t = 0; t < params.layers.size(); ++t) {
    const auto& layer = params.layers[t];
    if (layer.weight.data.size() != layer.weight.rows * layer.weight.cols ||
        layer.bias.size() != layer.weight.rows)
      throw ShapeError("mlp layer " + std::to_string(t) + " is internally inconsistent");
    if (t > 0 && params.layers[t - 1].out() != layer.in())
      throw ShapeError("mlp layers " + std::to_string(t - 1) + " and " + std::to_string(t) +
                       " do not chain");
  }
}

MlpOutput mlp_forward(const MlpParams& params, std::span<const double> x) {
  if (params.layers.empty()) throw ShapeError("mlp has no layers");
  if (x.size() != params.in()) {
    std::ostringstream msg;
    msg << "mlp_forward: input width " << x.size() << " != " << params.in();
    throw ShapeError(msg.str());
  }
  MlpOutput out;
  out.tape.inputs.reserve(params.layers.size());
  out.tape.pre.reserve(params.layers.size());
  std::vector<double> cur(x.begin(), x.end());
  for (const auto& layer : params.layers) {
    std::vector<double> pre(layer.out());
    for (std::size_t i = 0; i < layer.out(); ++i) pre[i] = dot(layer.weight.row(i), cur) + layer.bias[i];
    std::vector<double> post = pre;
    if (layer.activation == Activation::relu)
      for (auto& v : post) v = v > 0.0 ? v : 0.0;
    out.tape.inputs.push_back(std::move(cur));
    out.tape.pre.push_back(std::move(pre));
    cur = std::move(post);
  }
  out.y = std::move(cur);
  return out;
}

std::vector<double> mlp_backward_into(const MlpParams& params, const MlpTape& tape,
                                      std::span<const double> dy, MlpParams& grads, double scale,
                                      bool want_dx) {
  const std::size_t depth = params.layers.size();
  if (tape.inputs.size() != depth || tape.pre.size() != depth)
    throw ShapeError("mlp_backward: tape does not match parameters");
  if (grads.layers.size() != depth) throw ShapeError("mlp_backward: gradient buffer shape mismatch");
  if (dy.size() != params.out()) throw ShapeError("mlp_backward: output gradient width mismatch");

  std::vector<double> delta(dy.begin(), dy.end());
  for (std::size_t t = depth; t-- > 0;) {
    const auto& layer = params.layers[t];
    auto& g = grads.layers[t];
    if (layer.activation == Activation::relu) {
      const auto& pre = tape.pre[t];
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (!(pre[i] > 0.0)) delta[i] = 0.0;
    }
    const auto& input = tape.inputs[t];
    for (std::size_t i = 0; i < layer.out(); ++i) {
      const double d = delta[i] * scale;
      if (d == 0.0) continue;
      axpy(d, input, g.weight.row(i));
      g.bias[i] += d;
    }
    if (t == 0 && !want_dx) return {};
    std::vector<double> prev(layer.in(), 0.0);
    for (std::size_t i = 0; i < layer.out(); ++i)
      if (delta[i] != 0.0) axpy(delta[i], layer.weight.row(i), prev);
    delta = std::move(prev);
  }
  return delta;
}

MlpGrad mlp_backward(const MlpParams& params, const MlpTape& tape, std::span<const double> dy) {
  MlpGrad out;
  out.grads = zeros_like(params);
  out.dx = mlp_backward_into(params, tape, dy, out.grads, 1.0, true);
  return out;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> theta, double h) {
  std::vector<double> work(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    const double orig = work[i];
    work[i] = orig + h;
    const double up = f(work);
    work[i] = orig - h;
    const double down = f(work);
    work[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw ShapeError("max_relative_error: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

void append_tensors(MlpParams& p, const std::string& prefix, std::vector<NamedTensor>& out) {
  for (std::size_t t = 0; t < p.layers.size(); ++t) {
    out.push_back({prefix + ".layer" + std::to_string(t) + ".weight", p.layers[t].weight.data});
    out.push_back({prefix + ".layer" + std::to_string(t) + ".bias", p.layers[t].bias});
  }
}

void append_tensors(const MlpParams& p, const std::string& prefix,
                    std::vector<NamedConstTensor>& out) {
  for (std::size_t t = 0; t < p.layers.size(); ++t) {
    out.push_back({prefix + ".layer" + std::to_string(t) + ".weight", p.layers[t].weight.data});
    out.push_back({prefix + ".layer" + std::to_string(t) + ".bias", p.layers[t].bias});
  }
}

void adam_step(std::span<const NamedTensor> params, std::span<const NamedConstTensor> grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size()) throw ShapeError("adam_step: tensor count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].values.size() != grads[k].values.size())
      throw ShapeError("adam_step: shape mismatch for " + params[k].name);
    for (double g : grads[k].values)
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in " + grads[k].name);
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.values.size(), 0.0);
      state.v.emplace_back(p.values.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state does not match params");
  for (std::size_t k = 0; k < params.size(); ++k)
    if (state.m[k].size() != params[k].values.size())
      throw ShapeError("adam_step: state shape mismatch for " + params[k].name);

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].values;
    auto g = grads[k].values;
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace remvc
