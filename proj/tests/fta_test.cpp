// Copyright 2026 The freqdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "freqdiff/fta.hpp"
#include "test_util.hpp"

namespace freqdiff {
namespace {

using testing::gaussian;

constexpr FtaDims kToy{64, 128, 16};

TEST(SinusoidalPe, Values) {
  const Vector zero = sinusoidal_pe(0, 8);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(zero[2 * i], 0.0);
    EXPECT_EQ(zero[2 * i + 1], 1.0);
  }
  const Vector one = sinusoidal_pe(1, 2);
  EXPECT_EQ(one[0], std::sin(1.0));
  EXPECT_EQ(one[1], std::cos(1.0));
  EXPECT_NEAR(sinusoidal_pe(7, 4)[2], std::sin(7.0 / 100.0), 1e-15);
  for (std::size_t t : {3u, 250u, 999u}) EXPECT_LE(sinusoidal_pe(t, 64).cwiseAbs().maxCoeff(), 1.0);
  EXPECT_THROW(sinusoidal_pe(1, 3), InvalidArgument);
}

TEST(TimestepEmbed, ZeroAndBiasOnly) {
  FtaParams p = FtaParams::zeros(kToy);
  EXPECT_EQ(timestep_embed(p, 17), Vector::Zero(16));
  p.mlp_b2 = gaussian(16, 1, 3);
  EXPECT_EQ(timestep_embed(p, 17), p.mlp_b2);
  const FtaParams r = random_params(kToy, RngSeed(1));
  EXPECT_EQ(timestep_embed(r, 42), timestep_embed(r, 42));
  EXPECT_NE(timestep_embed(r, 42), timestep_embed(r, 43));
}

TEST(RandomParams, AdaLnZeroInitAndDeterminism) {
  const FtaParams a = random_params(kToy, RngSeed(5));
  EXPECT_EQ(a.gamma_w, Matrix::Zero(16, 16));
  EXPECT_EQ(a.beta_b, Vector::Zero(16));
  EXPECT_GT(a.w_q.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(a.w_q.cwiseAbs().maxCoeff(), 0.2);
  const FtaParams b = random_params(kToy, RngSeed(5));
  EXPECT_EQ(a.mlp_w1, b.mlp_w1);
  const FtaParams d = random_params(kToy, RngSeed(5), FtaInit::dense);
  EXPECT_GT(d.gamma_w.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NO_THROW(d.validate());
}

TEST(AdaLayerNorm, ZeroModulationIsPlainLayerNorm) {
  const FtaParams p = random_params(kToy, RngSeed(2));
  const Matrix X = gaussian(6, 16, 4, 3.0);
  const Vector e = timestep_embed(p, 100);
  EXPECT_LT((ada_layer_norm(X, e, p) - layer_norm(X, p.ln_epsilon)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(AdaLayerNorm, ConstantRowGivesShift) {
  const FtaParams p = random_params(kToy, RngSeed(2), FtaInit::dense);
  Matrix X = gaussian(3, 16, 5);
  X.row(1).setConstant(-4.0);
  const Vector e = timestep_embed(p, 10);
  const Vector shift = p.beta_w * e + p.beta_b;
  EXPECT_LT((ada_layer_norm(X, e, p).row(1).transpose() - shift).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(ada_layer_norm(gaussian(3, 15, 1), e, p), InvalidArgument);
}

TEST(LayerNorm, RowStatistics) {
  const Matrix X = gaussian(10, 16, 6, 5.0);
  const Matrix ln = layer_norm(X, 1e-12);
  for (Eigen::Index r = 0; r < 10; ++r) {
    const double mean = ln.row(r).mean();
    EXPECT_LT(std::abs(mean), 1e-12);
    EXPECT_NEAR((ln.row(r).array() - mean).square().mean(), 1.0, 1e-9);
  }
  const Matrix c = layer_norm(Matrix::Constant(2, 16, 3.0), 0.0);
  EXPECT_FALSE(c.allFinite());
}

TEST(FtaForward, ZeroValueProjectionIsIdentity) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    FtaParams p = random_params(kToy, RngSeed(s), FtaInit::dense);
    p.w_v.setZero();
    const Matrix X = gaussian(8, 16, 100 + s);
    for (std::size_t t : {0u, 500u, 999u}) EXPECT_EQ(fta_forward(p, X, t), X);
  }
}

TEST(FtaForward, AttentionRowsAreStochastic) {
  const FtaParams p = random_params(kToy, RngSeed(3), FtaInit::dense);
  const FtaForward f = fta_forward_cached(p, gaussian(12, 16, 7, 4.0), 321);
  EXPECT_LT((f.attn.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_GE(f.attn.minCoeff(), 0.0);
}

TEST(FtaForward, SingleFrameAttendsToItself) {
  const FtaParams p = random_params(kToy, RngSeed(4), FtaInit::dense);
  const Matrix X = gaussian(1, 16, 8);
  const FtaForward f = fta_forward_cached(p, X, 50);
  EXPECT_EQ(f.attn(0, 0), 1.0);
  const Matrix x_mod = ada_layer_norm(X, timestep_embed(p, 50), p);
  EXPECT_LT((f.out - (X + x_mod * p.w_v)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FtaForward, DependsOnTimestep) {
  const FtaParams p = random_params(kToy, RngSeed(6), FtaInit::dense);
  const Matrix X = gaussian(8, 16, 9);
  EXPECT_GT((fta_forward(p, X, 0) - fta_forward(p, X, 999)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FtaForward, ReportsNonFiniteIntermediate) {
  FtaParams p = random_params(kToy, RngSeed(6), FtaInit::dense, 0.0);
  Matrix X = gaussian(4, 16, 9);
  X.row(2).setConstant(1.0);
  EXPECT_THROW(fta_forward(p, X, 3), NumericalError);
  EXPECT_THROW(fta_forward(p, gaussian(4, 8, 1), 3), InvalidArgument);
}

TEST(FtaBackward, ResidualOnlyGradientIsInput) {
  const FtaParams p = FtaParams::zeros(kToy);
  const Matrix X = gaussian(8, 16, 10);
  EXPECT_EQ(fta_loss_gradients(p, X, 7).x, X);
}

TEST(FtaBackward, InputGradientMatchesFullFiniteDifference) {
  // Every coordinate of X, independent of the sampler in fta_grad_check.
  const FtaParams p = random_params({8, 12, 6}, RngSeed(11), FtaInit::dense);
  Matrix X = gaussian(5, 6, 12);
  const Matrix g = fta_loss_gradients(p, X, 77).x;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    const double saved = X.data()[i];
    X.data()[i] = saved + h;
    const double up = fta_half_sq_loss(p, X, 77);
    X.data()[i] = saved - h;
    const double down = fta_half_sq_loss(p, X, 77);
    X.data()[i] = saved;
    EXPECT_NEAR(g.data()[i], (up - down) / (2 * h), 1e-7 * std::max(1.0, std::abs(g.data()[i])));
  }
}

TEST(FtaGradCheck, ToyBlockPassesAtDoublePrecision) {
  const FtaParams p = random_params(kToy, RngSeed(21), FtaInit::dense);
  const Matrix X = gaussian(8, 16, 22);
  const auto report = fta_grad_check(p, X, 400, 1e-5, RngSeed(23));
  EXPECT_GE(report.coordinates, kGradCheckMinCoordinates);
  EXPECT_LT(report.max_rel_error, 1e-4) << "worst in " << report.worst_tensor;
}

TEST(FtaGradCheck, DeterministicAndRangeChecked) {
  const FtaParams p = random_params({8, 8, 4}, RngSeed(1), FtaInit::dense);
  const Matrix X = gaussian(3, 4, 2);
  const auto a = fta_grad_check(p, X, 9, 1e-5, RngSeed(4));
  const auto b = fta_grad_check(p, X, 9, 1e-5, RngSeed(4));
  EXPECT_EQ(a.max_rel_error, b.max_rel_error);
  EXPECT_EQ(a.worst_index, b.worst_index);
  EXPECT_THROW(fta_grad_check(p, X, 9, 1e-2, RngSeed(4)), InvalidArgument);
  EXPECT_THROW(fta_grad_check(p, X, 9, 1e-9, RngSeed(4)), InvalidArgument);
}

TEST(FrequencyHeatmap, RowsNormalizedAndConstantInBinZero) {
  const FtaParams p = random_params(kToy, RngSeed(31), FtaInit::dense);
  const Matrix X = gaussian(32, 16, 32);
  std::vector<std::pair<std::size_t, FeatureSequence>> outputs;
  for (std::size_t t : {999u, 500u, 100u, 0u}) outputs.emplace_back(t, fta_forward(p, X, t));
  outputs.emplace_back(5, Matrix::Constant(32, 16, 2.5));
  outputs.emplace_back(6, Matrix::Zero(32, 16));
  const auto map = frequency_heatmap(outputs, 16);
  ASSERT_EQ(map.rows.rows(), 6);
  EXPECT_EQ(map.timesteps.front(), 999u);
  for (Eigen::Index r = 0; r < map.rows.rows(); ++r) EXPECT_NEAR(map.rows.row(r).sum(), 1.0, 1e-9);
  EXPECT_NEAR(map.rows(4, 0), 1.0, 1e-12);
  EXPECT_LT(map.rows.row(4).tail(15).maxCoeff(), 1e-10);
  for (Eigen::Index b = 0; b < 16; ++b) EXPECT_EQ(map.rows(5, b), 1.0 / 16.0);
}

TEST(FrequencyHeatmap, ShapeMismatch) {
  std::vector<std::pair<std::size_t, FeatureSequence>> outputs{{1, Matrix::Zero(8, 4)}, {2, Matrix::Zero(9, 4)}};
  EXPECT_THROW(frequency_heatmap(outputs, 4), InvalidArgument);
  EXPECT_THROW(frequency_heatmap(std::span(outputs).first(1), 9), InvalidArgument);
}

}  // namespace
}  // namespace freqdiff
