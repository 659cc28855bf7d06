#include "resfault/residual_models.hpp"

#include "resfault/error.hpp"

namespace resfault {

std::string_view to_string(ModelKind kind) noexcept { return kind == ModelKind::AE ? "ae" : "oc"; }

ModelKind parse_model_kind(std::string_view text) {
  if (text == "ae" || text == "AE") return ModelKind::AE;
  if (text == "oc" || text == "OC") return ModelKind::OC;
  throw Error(Errc::ConfigInvalid, "unknown model kind '" + std::string(text) + "'");
}

std::size_t AeModel::bottleneck_layer() const {
  std::size_t best = 0;
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    if (net.layers[l].weight.rows() < net.layers[best].weight.rows()) best = l;
  }
  return best;
}

namespace {

std::vector<Index> dims_with(Index in, const std::vector<Index>& hidden, Index out) {
  std::vector<Index> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

AeTraining train_ae(const MatrixXd& train_z, const MatrixXd& val_z, const TrainConfig& config,
                    const Standardizer& standardizer, const std::vector<Index>& hidden) {
  if (train_z.cols() != val_z.cols() || train_z.cols() != standardizer.channels()) {
    throw Error(Errc::ShapeMismatch, "AE training data and standardizer disagree on width");
  }
  const Index nz = train_z.cols();
  DenseNet net = init_weights(dims_with(nz, hidden, nz), config.seed);
  auto log = train(std::move(net), train_z, train_z, val_z, val_z, config);
  AeModel model{log.net, standardizer};
  return {std::move(model), std::move(log)};
}

OcTraining train_oc(const MatrixXd& train_w, const MatrixXd& train_x, const MatrixXd& val_w,
                    const MatrixXd& val_x, const TrainConfig& config,
                    const Standardizer& standardizer, const std::vector<Index>& hidden) {
  if (train_w.cols() != val_w.cols() || train_x.cols() != val_x.cols() ||
      train_w.cols() + train_x.cols() != standardizer.channels()) {
    throw Error(Errc::ShapeMismatch, "OC training data and standardizer disagree on width");
  }
  DenseNet net = init_weights(dims_with(train_w.cols(), hidden, train_x.cols()), config.seed);
  auto log = train(std::move(net), train_w, train_x, val_w, val_x, config);
  OcModel model{log.net, standardizer};
  return {std::move(model), std::move(log)};
}

MatrixXd residual_ae(const AeModel& model, const MatrixXd& z_rows) {
  if (z_rows.cols() != model.n_z()) {
    throw Error(Errc::ShapeMismatch, "AE expects " + std::to_string(model.n_z()) + " channels");
  }
  return z_rows - forward(model.net, z_rows);
}

MatrixXd residual_oc(const OcModel& model, const MatrixXd& w_rows, const MatrixXd& x_rows) {
  if (w_rows.rows() != x_rows.rows() || x_rows.cols() != model.n_x()) {
    throw Error(Errc::ShapeMismatch, "OC residual: w/x shapes inconsistent with model");
  }
  return x_rows - forward(model.net, w_rows);
}

MatrixXd embedding_ae(const AeModel& model, const MatrixXd& z_rows) {
  auto outs = forward_layers(model.net, z_rows);
  return std::move(outs[model.bottleneck_layer()]);
}

}  // namespace resfault
