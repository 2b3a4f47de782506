#pragma once

// Small dense numeric kernel: row-major matrices, MLPs with hand-written
// reverse mode, Adam, Glorot initialization and a central-difference
// gradient oracle. Everything is 64-bit.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "remvc/rng.hpp"

namespace remvc {

struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Dense() = default;
  Dense(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Dense&) const = default;
};

enum class Activation { relu, identity };

struct Layer {
  Dense weight;  // out x in
  std::vector<double> bias;
  Activation activation = Activation::identity;

  std::size_t in() const { return weight.cols; }
  std::size_t out() const { return weight.rows; }
  bool operator==(const Layer&) const = default;
};

struct MlpParams {
  std::vector<Layer> layers;

  std::size_t in() const { return layers.front().in(); }
  std::size_t out() const { return layers.back().out(); }
  bool operator==(const MlpParams&) const = default;
};

/// Activations recorded by mlp_forward. inputs[t] is the input of layer t,
/// pre[t] its affine output before the activation.
struct MlpTape {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
};

struct MlpOutput {
  std::vector<double> y;
  MlpTape tape;
};

struct MlpGrad {
  MlpParams grads;
  std::vector<double> dx;
};

Dense glorot_init(std::size_t rows, std::size_t cols, Rng& rng);

/// widths = {in, hidden..., out}; hidden layers use relu, the last identity.
MlpParams make_mlp(std::span<const std::size_t> widths, Rng& rng);

/// Same shapes as `like`, all zeros.
MlpParams zeros_like(const MlpParams& like);

void check_chain(const MlpParams& params);

MlpOutput mlp_forward(const MlpParams& params, std::span<const double> x);

/// Reverse pass that adds scale * dL/dtheta into `grads` (which must share
/// shapes with params). Returns dL/dx only when want_dx is set, since the
/// first-layer input gradient is the most expensive product for wide inputs
/// and is useless when the input is data.
std::vector<double> mlp_backward_into(const MlpParams& params, const MlpTape& tape,
                                      std::span<const double> dy, MlpParams& grads,
                                      double scale = 1.0, bool want_dx = true);

MlpGrad mlp_backward(const MlpParams& params, const MlpTape& tape, std::span<const double> dy);

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> theta, double h = 1e-5);

/// Max over components of |a-b| / max(|a|, |b|, floor).
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-8);

struct NamedTensor {
  std::string name;
  std::span<double> values;
};

struct NamedConstTensor {
  std::string name;
  std::span<const double> values;
};

/// Flatten an MLP into named tensors, weights then bias per layer.
void append_tensors(MlpParams& p, const std::string& prefix, std::vector<NamedTensor>& out);
void append_tensors(const MlpParams& p, const std::string& prefix,
                    std::vector<NamedConstTensor>& out);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update. Lazily sizes the moment buffers on the
/// first call. Throws NumericError naming the tensor on a non-finite grad;
/// nothing is modified in that case.
void adam_step(std::span<const NamedTensor> params, std::span<const NamedConstTensor> grads,
               AdamState& state, double lr);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace remvc
