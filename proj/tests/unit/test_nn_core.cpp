#include <gtest/gtest.h>

#include <cmath>

#include "../support/fixtures.hpp"
#include "../support/gradcheck.hpp"
#include "../support/oracles.hpp"
#include "resfault/error.hpp"
#include "resfault/nn_core.hpp"

using namespace resfault;

namespace {

DenseNet linear_net(double w, double b) {
  DenseNet net;
  net.layers.push_back({MatrixXd::Constant(1, 1, w), VectorXd::Constant(1, b), Activation::Linear});
  return net;
}

}  // namespace

TEST(Forward, ZeroNetGivesZero) {
  auto net = init_weights({4, 3, 2}, 1);
  for (auto& l : net.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  EXPECT_TRUE(forward(net, fixture::random_matrix(5, 4, 2)).isZero(0.0));
}

TEST(Forward, IdentityLayer) {
  DenseNet net;
  net.layers.push_back({MatrixXd::Identity(3, 3), VectorXd::Zero(3), Activation::Linear});
  const MatrixXd x = fixture::random_matrix(4, 3, 3);
  EXPECT_EQ(forward(net, x), x);
}

TEST(Forward, MatchesExplicitSums) {
  const auto net = init_weights({4, 3, 2}, 11);
  const MatrixXd x = fixture::random_matrix(6, 4, 12);
  std::vector<oracle::Matrix> ws;
  std::vector<std::vector<double>> bs;
  for (const auto& l : net.layers) {
    ws.push_back(oracle::to_rows(l.weight));
    bs.emplace_back(l.bias.data(), l.bias.data() + l.bias.size());
  }
  const MatrixXd y = forward(net, x);
  for (Index r = 0; r < x.rows(); ++r) {
    const auto ref = oracle::forward(ws, bs, std::vector<double>(oracle::to_rows(x)[static_cast<std::size_t>(r)]));
    for (Index j = 0; j < 2; ++j) EXPECT_NEAR(y(r, j), ref[static_cast<std::size_t>(j)], 1e-12);
    const VectorXd single = forward(net, VectorXd(x.row(r).transpose()));
    EXPECT_NEAR((single.transpose() - y.row(r)).norm(), 0.0, 1e-12);
  }
}

TEST(Loss, SquaredNormAveragedOverBatch) {
  MatrixXd p(1, 2), t = MatrixXd::Zero(1, 2);
  p << 3, 4;
  EXPECT_DOUBLE_EQ(loss_mse(p, t), 25.0);
  EXPECT_DOUBLE_EQ(loss_mse(p, p), 0.0);
  const MatrixXd a = fixture::random_matrix(7, 5, 1), b = fixture::random_matrix(7, 5, 2);
  double s = 0.0;
  for (Index i = 0; i < 7; ++i)
    for (Index j = 0; j < 5; ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  EXPECT_NEAR(loss_mse(a, b), s / 7.0, 1e-12);
  EXPECT_THROW(loss_mse(a, MatrixXd::Zero(7, 4)), Error);
}

TEST(Backward, PerfectFitHasZeroGradient) {
  const auto net = init_weights({3, 4, 2}, 5);
  const MatrixXd x = fixture::random_matrix(5, 3, 6);
  const auto r = backward(net, x, forward(net, x));
  EXPECT_EQ(r.loss, 0.0);
  for (const auto& g : r.grads) {
    EXPECT_TRUE(g.weight.isZero(0.0));
    EXPECT_TRUE(g.bias.isZero(0.0));
  }
}

TEST(Backward, SingleLinearNeuron) {
  const double w = 1.5, x = 2.0, t = 1.0;
  const auto r = backward(linear_net(w, 0.0), MatrixXd::Constant(1, 1, x), MatrixXd::Constant(1, 1, t));
  EXPECT_DOUBLE_EQ(r.grads[0].weight(0, 0), 2.0 * x * (w * x - t));
  EXPECT_DOUBLE_EQ(r.grads[0].bias(0), 2.0 * (w * x - t));
}

TEST(Backward, MatchesFiniteDifferencesOnRandomNets) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto c = gradcheck::random_case(100 + s);
    const auto a = backward(c.net, c.input, c.target).grads;
    const auto f = finite_diff_grad(c.net, c.input, c.target, 1e-5);
    EXPECT_LT(gradcheck::max_rel_error(a, f), 1e-5) << "seed " << s;
  }
}

TEST(Backward, MatchesFiniteDifferencesOn654) {
  auto net = init_weights({6, 5, 4}, 21);
  const MatrixXd x = fixture::random_matrix(8, 6, 22);
  const MatrixXd t = fixture::random_matrix(8, 4, 23);
  ASSERT_GE(min_relu_margin(net, x), 1e-4);
  EXPECT_LT(gradcheck::max_rel_error(backward(net, x, t).grads, finite_diff_grad(net, x, t)), 1e-5);
}

TEST(FiniteDiff, QuadraticAndStationaryPoint) {
  const auto q = finite_diff_grad(linear_net(0.7, 0.0), MatrixXd::Constant(1, 1, 1.0), MatrixXd::Zero(1, 1));
  EXPECT_NEAR(q[0].weight(0, 0), 1.4, 1e-9);
  const auto z = finite_diff_grad(linear_net(2.0, 0.0), MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 2.0));
  EXPECT_LT(std::abs(z[0].weight(0, 0)), 1e-9);
  EXPECT_LT(std::abs(z[0].bias(0)), 1e-9);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  for (double g : {1e-3, 0.5, -7.0, 250.0}) {
    auto net = linear_net(0.0, 0.0);
    AdamState st(AdamConfig{}, net);
    Gradients grads = zeros_like(net);
    grads[0].weight(0, 0) = g;
    adam_step(net, grads, st);
    EXPECT_NEAR(net.layers[0].weight(0, 0), -0.001 * (g > 0 ? 1 : -1), 1e-6);
    EXPECT_EQ(net.layers[0].bias(0), 0.0);
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  auto net = init_weights({3, 2}, 1);
  const auto before = net.layers[0].weight;
  AdamState st(AdamConfig{}, net);
  for (int i = 0; i < 5; ++i) adam_step(net, zeros_like(net), st);
  EXPECT_EQ(net.layers[0].weight, before);
}

TEST(Adam, TwoStepTrace) {
  const double lr = 0.001, b1 = 0.9, b2 = 0.999, eps = 1e-8, p0 = 0.5;
  auto net = linear_net(p0, 0.0);
  AdamState st(AdamConfig{lr, b1, b2, eps}, net);
  Gradients g = zeros_like(net);
  g[0].weight(0, 0) = 1.0;
  double m = 0.0, v = 0.0, p = p0;
  for (int t = 1; t <= 2; ++t) {
    adam_step(net, g, st);
    m = b1 * m + (1 - b1) * 1.0;
    v = b2 * v + (1 - b2) * 1.0;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    p -= lr * mh / (std::sqrt(vh) + eps);
    EXPECT_NEAR(net.layers[0].weight(0, 0), p, 1e-12);
  }
  EXPECT_EQ(st.step_count, 2);
}

TEST(Init, HeUniformBoundsAndZeroBias) {
  const auto net = init_weights({100, 50, 3}, 9);
  EXPECT_LE(net.layers[0].weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 100.0));
  EXPECT_LE(net.layers[1].weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 50.0));
  EXPECT_GT(net.layers[0].weight.cwiseAbs().maxCoeff(), 0.9 * std::sqrt(6.0 / 100.0));
  for (const auto& l : net.layers) EXPECT_TRUE(l.bias.isZero(0.0));
  EXPECT_EQ(net.layers[0].activation, Activation::Relu);
  EXPECT_EQ(net.layers[1].activation, Activation::Linear);
  const auto again = init_weights({100, 50, 3}, 9);
  EXPECT_EQ(again.layers[0].weight, net.layers[0].weight);
  EXPECT_EQ(net.parameter_count(), 100 * 50 + 50 + 50 * 3 + 3);
}

TEST(Train, LearnsLinearMap) {
  const MatrixXd x = fixture::random_matrix(400, 1, 3);
  const MatrixXd vx = fixture::random_matrix(100, 1, 4);
  TrainConfig cfg;
  cfg.epochs = 70;
  cfg.batch_size = 16;
  cfg.adam.lr = 0.01;
  cfg.seed = 5;
  const auto r = train(init_weights({1, 1}, 7), x, 2.0 * x, vx, 2.0 * vx, cfg);
  EXPECT_LT(r.history.back().val_loss, 1e-4);
  EXPECT_LT(r.history.back().train_loss, r.initial_train_loss);
}

TEST(Train, PatienceZeroStopsOnFirstMiss) {
  const MatrixXd x = fixture::random_matrix(64, 2, 3);
  const MatrixXd y = fixture::random_matrix(64, 1, 4);
  TrainConfig cfg;
  cfg.patience = 0;
  cfg.epochs = 200;
  cfg.adam.lr = 0.05;
  const auto r = train(init_weights({2, 8, 1}, 1), x, y, fixture::random_matrix(32, 2, 5),
                       fixture::random_matrix(32, 1, 6), cfg);
  ASSERT_TRUE(r.stopped_early);
  const auto n = r.history.size();
  ASSERT_GE(n, 2u);
  EXPECT_GE(r.history[n - 1].val_loss, r.history[n - 2].val_loss);
  for (std::size_t i = 1; i + 1 < n; ++i) EXPECT_LT(r.history[i].val_loss, r.history[i - 1].val_loss);
  EXPECT_EQ(r.best_epoch, static_cast<int>(n) - 1);
}

TEST(Train, RestoresBestEpochWeights) {
  const MatrixXd x = fixture::random_matrix(64, 2, 3);
  const MatrixXd y = fixture::random_matrix(64, 1, 4);
  const MatrixXd vx = fixture::random_matrix(32, 2, 5), vy = fixture::random_matrix(32, 1, 6);
  TrainConfig cfg;
  cfg.patience = 3;
  cfg.epochs = 300;
  cfg.adam.lr = 0.05;
  const auto r = train(init_weights({2, 16, 1}, 1), x, y, vx, vy, cfg);
  const double best = r.history[static_cast<std::size_t>(r.best_epoch - 1)].val_loss;
  EXPECT_EQ(loss_mse(forward(r.net, vx), vy), best);
  for (const auto& e : r.history) EXPECT_GE(e.val_loss, best);
}

TEST(Train, SameSeedSameHistory) {
  const MatrixXd x = fixture::random_matrix(100, 3, 1);
  const MatrixXd y = fixture::random_matrix(100, 2, 2);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 17;
  const auto a = train(init_weights({3, 8, 2}, 3), x, y, x, y, cfg);
  const auto b = train(init_weights({3, 8, 2}, 3), x, y, x, y, cfg);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].val_loss, b.history[i].val_loss);
  }
  EXPECT_EQ(a.net.layers[0].weight, b.net.layers[0].weight);
}

TEST(Train, InvalidConfig) {
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), Error);
}
