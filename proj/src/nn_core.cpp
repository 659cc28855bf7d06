#include "resfault/nn_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "resfault/error.hpp"

namespace resfault {

namespace {

void apply_activation(MatrixXd& z, Activation act) {
  if (act == Activation::Relu) z = z.cwiseMax(0.0);
}

void require_same_shape(const MatrixXd& a, const MatrixXd& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::ShapeMismatch,
                std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()));
  }
}

void require_input(const DenseNet& net, Index cols) {
  if (net.layers.empty()) throw Error(Errc::ShapeMismatch, "network has no layers");
  if (cols != net.input_dim()) {
    throw Error(Errc::ShapeMismatch, "input width " + std::to_string(cols) + ", network expects " +
                                         std::to_string(net.input_dim()));
  }
}

}  // namespace

Index DenseNet::input_dim() const { return layers.empty() ? 0 : layers.front().weight.cols(); }
Index DenseNet::output_dim() const { return layers.empty() ? 0 : layers.back().weight.rows(); }

std::vector<Index> DenseNet::layer_dims() const {
  std::vector<Index> dims;
  if (layers.empty()) return dims;
  dims.push_back(input_dim());
  for (const auto& layer : layers) dims.push_back(layer.weight.rows());
  return dims;
}

Index DenseNet::parameter_count() const {
  Index n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  return n;
}

void DenseNet::validate() const {
  if (layers.empty()) throw Error(Errc::ShapeMismatch, "network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.weight.rows()) {
      throw Error(Errc::ShapeMismatch, "layer " + std::to_string(l) + ": bias/weight mismatch");
    }
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows()) {
      throw Error(Errc::ShapeMismatch, "layer " + std::to_string(l) + " does not chain");
    }
  }
}

Gradients zeros_like(const DenseNet& net) {
  Gradients g;
  g.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    g.push_back({MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                 VectorXd::Zero(layer.bias.size())});
  }
  return g;
}

DenseNet init_weights(const std::vector<Index>& layer_dims, std::uint64_t seed) {
  if (layer_dims.size() < 2) throw Error(Errc::ShapeMismatch, "need at least input and output dims");
  for (Index d : layer_dims) {
    if (d < 1) throw Error(Errc::ShapeMismatch, "layer dims must be >= 1");
  }
  std::mt19937_64 rng(seed);
  DenseNet net;
  for (std::size_t l = 1; l < layer_dims.size(); ++l) {
    const Index fan_in = layer_dims[l - 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer;
    layer.weight.resize(layer_dims[l], fan_in);
    for (Index j = 0; j < layer.weight.cols(); ++j) {
      for (Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
    }
    layer.bias = VectorXd::Zero(layer_dims[l]);
    layer.activation = l + 1 == layer_dims.size() ? Activation::Linear : Activation::Relu;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::vector<MatrixXd> forward_layers(const DenseNet& net, const MatrixXd& batch) {
  require_input(net, batch.cols());
  std::vector<MatrixXd> outs;
  outs.reserve(net.layers.size());
  const MatrixXd* prev = &batch;
  for (const auto& layer : net.layers) {
    MatrixXd z(prev->rows(), layer.weight.rows());
    z.noalias() = *prev * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(z, layer.activation);
    outs.push_back(std::move(z));
    prev = &outs.back();
  }
  return outs;
}

MatrixXd forward(const DenseNet& net, const MatrixXd& batch) {
  require_input(net, batch.cols());
  MatrixXd a = batch;
  for (const auto& layer : net.layers) {
    MatrixXd z(a.rows(), layer.weight.rows());
    z.noalias() = a * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(z, layer.activation);
    a = std::move(z);
  }
  return a;
}

VectorXd forward(const DenseNet& net, const VectorXd& input) {
  return forward(net, MatrixXd(input.transpose())).row(0).transpose();
}

double loss_mse(const MatrixXd& pred, const MatrixXd& target) {
  require_same_shape(pred, target, "loss_mse");
  if (pred.rows() == 0) throw Error(Errc::EmptyDataset, "loss of an empty batch");
  return (pred - target).squaredNorm() / static_cast<double>(pred.rows());
}

BackwardResult backward(const DenseNet& net, const MatrixXd& input, const MatrixXd& target) {
  require_input(net, input.cols());
  if (target.rows() != input.rows() || target.cols() != net.output_dim()) {
    throw Error(Errc::ShapeMismatch, "target shape does not match network output");
  }
  if (input.rows() == 0) throw Error(Errc::EmptyDataset, "backward on an empty batch");

  // Keep pre-activations for the ReLU masks and post-activations as layer inputs.
  const std::size_t n_layers = net.layers.size();
  std::vector<MatrixXd> pre(n_layers);
  std::vector<MatrixXd> post(n_layers);
  const MatrixXd* prev = &input;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = net.layers[l];
    pre[l].resize(prev->rows(), layer.weight.rows());
    pre[l].noalias() = *prev * layer.weight.transpose();
    pre[l].rowwise() += layer.bias.transpose();
    post[l] = layer.activation == Activation::Relu ? MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
    prev = &post[l];
  }

  BackwardResult out;
  const double batch = static_cast<double>(input.rows());
  MatrixXd delta = post.back() - target;
  out.loss = delta.squaredNorm() / batch;
  delta *= 2.0 / batch;

  out.grads.resize(n_layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = net.layers[l];
    if (layer.activation == Activation::Relu) {
      delta = (pre[l].array() > 0.0).select(delta, 0.0);
    }
    const MatrixXd& layer_in = l == 0 ? input : post[l - 1];
    out.grads[l].weight.noalias() = delta.transpose() * layer_in;
    out.grads[l].bias = delta.colwise().sum().transpose();
    if (l > 0) {
      MatrixXd next(delta.rows(), layer.weight.cols());
      next.noalias() = delta * layer.weight;
      delta = std::move(next);
    }
  }
  return out;
}

Gradients finite_diff_grad(const DenseNet& net, const MatrixXd& input, const MatrixXd& target,
                           double h) {
  DenseNet probe = net;
  Gradients g = zeros_like(net);
  auto central = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = loss_mse(forward(probe, input), target);
    param = saved - h;
    const double down = loss_mse(forward(probe, input), target);
    param = saved;
    return (up - down) / (2.0 * h);
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    for (Index j = 0; j < layer.weight.cols(); ++j) {
      for (Index i = 0; i < layer.weight.rows(); ++i) g[l].weight(i, j) = central(layer.weight(i, j));
    }
    for (Index i = 0; i < layer.bias.size(); ++i) g[l].bias(i) = central(layer.bias(i));
  }
  return g;
}

double min_relu_margin(const DenseNet& net, const MatrixXd& input) {
  require_input(net, input.cols());
  double margin = std::numeric_limits<double>::infinity();
  MatrixXd a = input;
  for (const auto& layer : net.layers) {
    MatrixXd z = a * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (layer.activation == Activation::Relu) {
      margin = std::min(margin, z.cwiseAbs().minCoeff());
      z = z.cwiseMax(0.0);
    }
    a = std::move(z);
  }
  return margin;
}

AdamState::AdamState(const AdamConfig& cfg, const DenseNet& shape)
    : config(cfg), first_moment(zeros_like(shape)), second_moment(zeros_like(shape)) {}

void adam_step(DenseNet& net, const Gradients& grads, AdamState& state) {
  if (grads.size() != net.layers.size() || state.first_moment.size() != net.layers.size()) {
    throw Error(Errc::ShapeMismatch, "gradient layer count does not match network");
  }
  const auto& c = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    if (param.size() != grad.size()) throw Error(Errc::ShapeMismatch, "gradient shape mismatch");
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    param.array() -=
        c.lr * (m.array() / correct1) / ((v.array() / correct2).sqrt() + c.eps);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weight, grads[l].weight, state.first_moment[l].weight,
           state.second_moment[l].weight);
    update(net.layers[l].bias, grads[l].bias, state.first_moment[l].bias,
           state.second_moment[l].bias);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(Errc::ConfigInvalid, "epochs must be >= 1");
  if (batch_size < 1) throw Error(Errc::ConfigInvalid, "batch_size must be >= 1");
  if (patience < 0) throw Error(Errc::ConfigInvalid, "patience must be >= 0");
  if (!(adam.lr > 0.0)) throw Error(Errc::ConfigInvalid, "learning rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw Error(Errc::ConfigInvalid, "Adam betas must lie in [0, 1)");
  }
}

TrainResult train(DenseNet net, const MatrixXd& train_input, const MatrixXd& train_target,
                  const MatrixXd& val_input, const MatrixXd& val_target, const TrainConfig& config) {
  config.validate();
  net.validate();
  if (train_input.rows() == 0 || val_input.rows() == 0) {
    throw Error(Errc::EmptyDataset, "training and validation sets must be non-empty");
  }
  if (train_target.rows() != train_input.rows() || val_target.rows() != val_input.rows()) {
    throw Error(Errc::ShapeMismatch, "input/target row counts differ");
  }

  TrainResult result;
  result.initial_train_loss = loss_mse(forward(net, train_input), train_target);
  result.initial_val_loss = loss_mse(forward(net, val_input), val_target);

  const Index n = train_input.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(config.seed);
  AdamState adam(config.adam, net);

  double best_val = std::numeric_limits<double>::infinity();
  int waited = 0;
  const int allowed = std::max(config.patience, 1);
  MatrixXd xb;
  MatrixXd yb;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (Index start = 0; start < n; start += config.batch_size) {
      const Index size = std::min<Index>(config.batch_size, n - start);
      const auto idx = std::span(order).subspan(static_cast<std::size_t>(start),
                                                static_cast<std::size_t>(size));
      xb = train_input(idx, Eigen::placeholders::all);
      yb = train_target(idx, Eigen::placeholders::all);
      const auto step = backward(net, xb, yb);
      loss_sum += step.loss * static_cast<double>(size);
      adam_step(net, step.grads, adam);
    }
    const double val_loss = loss_mse(forward(net, val_input), val_target);
    result.history.push_back({epoch, loss_sum / static_cast<double>(n), val_loss});

    if (val_loss < best_val) {
      best_val = val_loss;
      result.best_epoch = epoch;
      result.net = net;
      waited = 0;
    } else if (++waited >= allowed) {
      result.stopped_early = epoch < config.epochs;
      break;
    }
  }
  if (result.best_epoch == 0) result.net = net;  // every epoch produced NaN
  return result;
}

}  // namespace resfault
