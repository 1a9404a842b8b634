#pragma once

// Multilayer perceptron classifier: the network whose per-example losses drive
// every selection rule in this library. Dense types are templated on the
// scalar so the same code path trains in float and is gradient-checked in
// double.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lec/random.hpp"

namespace lec {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Per-example cross-entropy losses, row-aligned with the evaluated features.
template <typename Scalar>
using LossVector = Vector<Scalar>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic evaluation, or a dropout pass whose masks are a pure function
/// of the seed and the input shape.
struct ForwardMode {
  std::optional<std::uint64_t> dropout_seed;

  static ForwardMode deterministic() { return {}; }
  static ForwardMode stochastic(std::uint64_t seed) { return {seed}; }
  bool is_stochastic() const { return dropout_seed.has_value(); }
};

struct MlpShape {
  Index inputs = 0;
  std::vector<Index> hidden{128, 128};
  Index classes = 0;
  double dropout = 0.25;
};

template <typename Scalar>
struct Layer {
  Matrix<Scalar> weight;  // fan_in x fan_out
  Vector<Scalar> bias;
};

/// Parameters plus Adam moments. Moment buffers mirror `layers` shape-for-shape.
template <typename Scalar>
struct ModelState {
  std::vector<Layer<Scalar>> layers;
  std::vector<Scalar> dropout;  // one rate per hidden layer
  std::vector<Layer<Scalar>> first_moment;
  std::vector<Layer<Scalar>> second_moment;
  std::uint64_t step = 0;

  Index inputs() const { return layers.front().weight.rows(); }
  Index classes() const { return layers.back().weight.cols(); }
  std::size_t hidden_layers() const { return layers.size() - 1; }
};

struct AdamHyper {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double epsilon = 1e-8;
};

inline constexpr double kProbabilityFloor = 1e-12;

enum class StepStatus { Applied, EmptyBatch };

namespace detail {

template <typename Scalar>
std::vector<Layer<Scalar>> zeros_like(const std::vector<Layer<Scalar>>& layers) {
  std::vector<Layer<Scalar>> out;
  out.reserve(layers.size());
  for (const auto& l : layers)
    out.push_back({Matrix<Scalar>::Zero(l.weight.rows(), l.weight.cols()), Vector<Scalar>::Zero(l.bias.size())});
  return out;
}

inline void validate_shape(const MlpShape& shape) {
  if (shape.inputs <= 0 || shape.classes < 2) throw ShapeError("mlp needs inputs > 0 and at least 2 classes");
  for (Index h : shape.hidden)
    if (h <= 0) throw ShapeError("hidden widths must be positive");
  if (!(shape.dropout >= 0.0 && shape.dropout < 1.0)) throw std::invalid_argument("dropout rate must lie in [0,1)");
}

template <typename Scalar>
ModelState<Scalar> allocate(const MlpShape& shape) {
  validate_shape(shape);
  ModelState<Scalar> m;
  Index fan_in = shape.inputs;
  auto add = [&](Index fan_out) {
    m.layers.push_back({Matrix<Scalar>::Zero(fan_in, fan_out), Vector<Scalar>::Zero(fan_out)});
    fan_in = fan_out;
  };
  for (Index h : shape.hidden) add(h);
  add(shape.classes);
  m.dropout.assign(shape.hidden.size(), static_cast<Scalar>(shape.dropout));
  m.first_moment = zeros_like(m.layers);
  m.second_moment = zeros_like(m.layers);
  return m;
}

template <typename Scalar>
void softmax_rows(Matrix<Scalar>& z) {
  z.colwise() -= z.rowwise().maxCoeff();
  z = z.array().exp().matrix();
  const Vector<Scalar> sums = z.rowwise().sum();
  z.array().colwise() /= sums.array();
}

template <typename Scalar>
struct ForwardTrace {
  std::vector<Matrix<Scalar>> inputs;           // input to each layer, after dropout
  std::vector<Matrix<Scalar>> pre_activations;  // hidden layers only
  std::vector<Matrix<Scalar>> masks;            // scaled keep masks; empty when no dropout applied
  Matrix<Scalar> probabilities;
};

template <typename Scalar, typename Derived>
ForwardTrace<Scalar> trace_forward(const ModelState<Scalar>& model, const Eigen::MatrixBase<Derived>& features,
                                   const ForwardMode& mode) {
  if (features.cols() != model.inputs())
    throw ShapeError("feature width " + std::to_string(features.cols()) + " does not match model input width " +
                     std::to_string(model.inputs()));
  ForwardTrace<Scalar> t;
  const std::size_t hidden = model.hidden_layers();
  t.inputs.reserve(model.layers.size());
  t.inputs.emplace_back(features.template cast<Scalar>());

  std::optional<Rng> rng;
  if (mode.is_stochastic()) rng.emplace(*mode.dropout_seed);

  for (std::size_t l = 0; l < hidden; ++l) {
    const auto& layer = model.layers[l];
    Matrix<Scalar> z = t.inputs.back() * layer.weight;
    z.rowwise() += layer.bias.transpose();
    Matrix<Scalar> a = z.cwiseMax(Scalar(0));
    Matrix<Scalar> mask;
    const Scalar rate = model.dropout[l];
    if (rng && rate > Scalar(0)) {
      const double keep = 1.0 - static_cast<double>(rate);
      const Scalar scale = Scalar(1) / static_cast<Scalar>(keep);
      mask.resize(a.rows(), a.cols());
      for (Index r = 0; r < mask.rows(); ++r)
        for (Index c = 0; c < mask.cols(); ++c) mask(r, c) = canonical(*rng) < keep ? scale : Scalar(0);
      a.array() *= mask.array();
    }
    t.pre_activations.push_back(std::move(z));
    t.masks.push_back(std::move(mask));
    t.inputs.push_back(std::move(a));
  }
  const auto& out = model.layers.back();
  t.probabilities = t.inputs.back() * out.weight;
  t.probabilities.rowwise() += out.bias.transpose();
  softmax_rows(t.probabilities);
  return t;
}

inline void validate_labels(std::span<const int> labels, Index rows, Index classes) {
  if (static_cast<Index>(labels.size()) != rows)
    throw ShapeError("label count " + std::to_string(labels.size()) + " does not match row count " +
                     std::to_string(rows));
  for (int y : labels)
    if (y < 0 || y >= classes)
      throw std::out_of_range("label " + std::to_string(y) + " outside [0," + std::to_string(classes) + ")");
}

}  // namespace detail

/// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
template <typename Scalar>
ModelState<Scalar> make_model(const MlpShape& shape, std::uint64_t seed) {
  auto m = detail::allocate<Scalar>(shape);
  Rng rng(seed);
  for (auto& layer : m.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.weight.rows()));
    for (Index c = 0; c < layer.weight.cols(); ++c)
      for (Index r = 0; r < layer.weight.rows(); ++r)
        layer.weight(r, c) = static_cast<Scalar>((2.0 * canonical(rng) - 1.0) * bound);
  }
  return m;
}

template <typename Scalar>
ModelState<Scalar> zero_model(const MlpShape& shape) {
  return detail::allocate<Scalar>(shape);
}

/// Row-wise class probabilities. Dropout is active only in stochastic mode.
template <typename Scalar, typename Derived>
Matrix<Scalar> forward(const ModelState<Scalar>& model, const Eigen::MatrixBase<Derived>& features,
                       const ForwardMode& mode = ForwardMode::deterministic()) {
  return detail::trace_forward(model, features, mode).probabilities;
}

/// Cross-entropy per row: -log(max(p[label], 1e-12)).
template <typename Scalar, typename Derived>
LossVector<Scalar> per_example_loss(const ModelState<Scalar>& model, const Eigen::MatrixBase<Derived>& features,
                                    std::span<const int> labels,
                                    const ForwardMode& mode = ForwardMode::deterministic()) {
  detail::validate_labels(labels, features.rows(), model.classes());
  const Matrix<Scalar> p = forward(model, features, mode);
  LossVector<Scalar> loss(p.rows());
  for (Index i = 0; i < p.rows(); ++i)
    loss(i) = -std::log(std::max(p(i, labels[i]), static_cast<Scalar>(kProbabilityFloor)));
  return loss;
}

/// Gradient of the mean loss over the rows w.r.t. every layer's weight and bias.
/// Rows whose label probability sits on the clamp floor contribute nothing.
template <typename Scalar, typename Derived>
std::vector<Layer<Scalar>> gradients(const ModelState<Scalar>& model, const Eigen::MatrixBase<Derived>& features,
                                     std::span<const int> labels,
                                     const ForwardMode& mode = ForwardMode::deterministic()) {
  detail::validate_labels(labels, features.rows(), model.classes());
  auto t = detail::trace_forward(model, features, mode);
  const Index n = features.rows();
  Matrix<Scalar> delta = std::move(t.probabilities);
  for (Index i = 0; i < n; ++i) {
    if (delta(i, labels[i]) < static_cast<Scalar>(kProbabilityFloor))
      delta.row(i).setZero();
    else
      delta(i, labels[i]) -= Scalar(1);
  }
  delta /= static_cast<Scalar>(n);

  std::vector<Layer<Scalar>> grads(model.layers.size());
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    grads[l].weight.noalias() = t.inputs[l].transpose() * delta;
    grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix<Scalar> upstream = delta * model.layers[l].weight.transpose();
    const std::size_t h = l - 1;
    if (t.masks[h].size() > 0) upstream.array() *= t.masks[h].array();
    upstream.array() *= (t.pre_activations[h].array() > Scalar(0)).template cast<Scalar>();
    delta = std::move(upstream);
  }
  return grads;
}

/// One Adam update on the mean loss of the given rows. An empty batch leaves the
/// model untouched and reports EmptyBatch.
template <typename Scalar, typename Derived>
[[nodiscard]] StepStatus sgd_step(ModelState<Scalar>& model, const Eigen::MatrixBase<Derived>& features,
                                  std::span<const int> labels, double learning_rate,
                                  const ForwardMode& mode = ForwardMode::deterministic()) {
  if (features.rows() == 0) return StepStatus::EmptyBatch;
  const auto grads = gradients(model, features, labels, mode);
  ++model.step;
  const double t = static_cast<double>(model.step);
  const Scalar b1 = static_cast<Scalar>(AdamHyper::beta1);
  const Scalar b2 = static_cast<Scalar>(AdamHyper::beta2);
  const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(AdamHyper::beta1, t));
  const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(AdamHyper::beta2, t));
  const Scalar lr = static_cast<Scalar>(learning_rate);
  const Scalar eps = static_cast<Scalar>(AdamHyper::epsilon);

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weight, model.first_moment[l].weight, model.second_moment[l].weight, grads[l].weight);
    update(model.layers[l].bias, model.first_moment[l].bias, model.second_moment[l].bias, grads[l].bias);
    if (!model.layers[l].weight.allFinite() || !model.layers[l].bias.allFinite())
      throw NumericalError("non-finite parameters after update " + std::to_string(model.step));
  }
  return StepStatus::Applied;
}

/// Argmax class per row; ties resolve to the lowest class index.
template <typename Scalar>
std::vector<int> argmax_rows(const Matrix<Scalar>& probabilities) {
  std::vector<int> out(static_cast<std::size_t>(probabilities.rows()));
  for (Index i = 0; i < probabilities.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < probabilities.cols(); ++c)
      if (probabilities(i, c) > probabilities(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace lec
