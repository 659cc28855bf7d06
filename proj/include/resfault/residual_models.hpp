#pragma once

#include <string_view>
#include <vector>

#include "resfault/nn_core.hpp"
#include "resfault/preprocess.hpp"

namespace resfault {

enum class ModelKind { AE, OC };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view text);

/// Autoencoder over the full z = [x | w] vector.
struct AeModel {
  DenseNet net;
  Standardizer standardizer;  // over z

  Index n_z() const { return net.input_dim(); }
  /// Index of the layer whose output is the bottleneck embedding.
  std::size_t bottleneck_layer() const;
};

/// Regression from operating descriptors w to sensor readings x.
struct OcModel {
  DenseNet net;
  Standardizer standardizer;  // over z = [x | w]

  Index n_w() const { return net.input_dim(); }
  Index n_x() const { return net.output_dim(); }
};

inline const std::vector<Index> kAeHidden{128, 8, 128};
inline const std::vector<Index> kOcHidden{128, 128};

struct AeTraining {
  AeModel model;
  TrainResult log;
};

struct OcTraining {
  OcModel model;
  TrainResult log;
};

/// `train_z` and `val_z` are standardized healthy z rows.
AeTraining train_ae(const MatrixXd& train_z, const MatrixXd& val_z, const TrainConfig& config,
                    const Standardizer& standardizer, const std::vector<Index>& hidden = kAeHidden);

/// Inputs are standardized; `train_w` pairs row-wise with `train_x`.
OcTraining train_oc(const MatrixXd& train_w, const MatrixXd& train_x, const MatrixXd& val_w,
                    const MatrixXd& val_x, const TrainConfig& config,
                    const Standardizer& standardizer, const std::vector<Index>& hidden = kOcHidden);

/// r = z - D(E(z)), rows standardized with the model's standardizer.
MatrixXd residual_ae(const AeModel& model, const MatrixXd& z_rows);

/// r = x - M(w).
MatrixXd residual_oc(const OcModel& model, const MatrixXd& w_rows, const MatrixXd& x_rows);

/// Bottleneck activations of the autoencoder.
MatrixXd embedding_ae(const AeModel& model, const MatrixXd& z_rows);

}  // namespace resfault
