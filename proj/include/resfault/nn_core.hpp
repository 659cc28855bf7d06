#pragma once

#include <cstdint>
#include <vector>

#include "resfault/data_model.hpp"

namespace resfault {

enum class Activation { Relu, Linear };

struct DenseLayer {
  MatrixXd weight;  // out x in
  VectorXd bias;    // out
  Activation activation = Activation::Linear;
};

/// Fully connected feed-forward network. Samples are rows.
struct DenseNet {
  std::vector<DenseLayer> layers;

  Index input_dim() const;
  Index output_dim() const;
  /// [d0, d1, ..., dL]
  std::vector<Index> layer_dims() const;
  Index parameter_count() const;
  /// Throws ShapeMismatch when consecutive layers do not chain.
  void validate() const;
};

/// Gradient (or Adam moment) storage shaped like a DenseNet's parameters.
struct LayerGradient {
  MatrixXd weight;
  VectorXd bias;
};
using Gradients = std::vector<LayerGradient>;

Gradients zeros_like(const DenseNet& net);

/// He-uniform weights (limit sqrt(6 / fan_in)), zero biases, ReLU hidden
/// layers and a linear output layer.
DenseNet init_weights(const std::vector<Index>& layer_dims, std::uint64_t seed);

VectorXd forward(const DenseNet& net, const VectorXd& input);
MatrixXd forward(const DenseNet& net, const MatrixXd& batch);

/// Post-activation output of every layer, in order; the last entry equals
/// forward(net, batch).
std::vector<MatrixXd> forward_layers(const DenseNet& net, const MatrixXd& batch);

/// Mean over samples of the squared Euclidean residual norm.
double loss_mse(const MatrixXd& pred, const MatrixXd& target);

struct BackwardResult {
  double loss = 0.0;
  Gradients grads;
};

/// Gradient of loss_mse(forward(net, input), target) with respect to every
/// weight and bias. ReLU'(0) is taken as 0.
BackwardResult backward(const DenseNet& net, const MatrixXd& input, const MatrixXd& target);

/// Central differences (L(p + h) - L(p - h)) / 2h, one parameter at a time.
Gradients finite_diff_grad(const DenseNet& net, const MatrixXd& input, const MatrixXd& target,
                           double h = 1e-5);

/// Smallest |pre-activation| over all ReLU units and samples; +inf when the
/// net has no ReLU layer.
double min_relu_margin(const DenseNet& net, const MatrixXd& input);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  long step_count = 0;
  Gradients first_moment;
  Gradients second_moment;

  AdamState(const AdamConfig& config, const DenseNet& shape);
};

/// One bias-corrected Adam update in place.
void adam_step(DenseNet& net, const Gradients& grads, AdamState& state);

struct TrainConfig {
  int epochs = 70;
  int batch_size = 64;
  int patience = 10;
  std::uint64_t seed = 0;
  bool shuffle = true;
  AdamConfig adam;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  DenseNet net;  // parameters from the best validation epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 1-based
  double initial_train_loss = 0.0;
  double initial_val_loss = 0.0;
  bool stopped_early = false;
};

/// Mini-batch Adam on MSE with early stopping on validation loss. Training
/// stops once `patience` consecutive epochs (at least one) fail to improve the
/// best validation loss.
TrainResult train(DenseNet net, const MatrixXd& train_input, const MatrixXd& train_target,
                  const MatrixXd& val_input, const MatrixXd& val_target, const TrainConfig& config);

}  // namespace resfault
