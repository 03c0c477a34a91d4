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
#include <numbers>

#include <gtest/gtest.h>

#include "freqdiff/signalio.hpp"
#include "freqdiff/transform.hpp"
#include "test_util.hpp"

namespace freqdiff {
namespace {

using testing::gaussian;

// Long-double evaluation of the DCT-II sum, written independently of the
// library path (no phase reduction, no shared helpers).
Vector reference_dct(const Vector& x) {
  const auto N = x.size();
  Vector out(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    long double acc = 0.0L;
    for (Eigen::Index n = 0; n < N; ++n)
      acc += static_cast<long double>(x[n]) *
             std::cos(std::numbers::pi_v<long double> * (2.0L * n + 1.0L) * k / (2.0L * N));
    const long double a = k == 0 ? std::sqrt(1.0L / N) : std::sqrt(2.0L / N);
    out[k] = static_cast<double>(a * acc);
  }
  return out;
}

TEST(Dct2, ConstantSignal) {
  const double c = 1.75;
  const Vector v = dct2(Vector::Constant(4, c));
  EXPECT_NEAR(v[0], 2.0 * c, 1e-15);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(v[k], 0.0, 1e-15);
}

TEST(Dct2, HandComputedTwoPoint) {
  // alpha(1) = 1 at N = 2: cos(pi/4) - cos(3pi/4) = sqrt(2).
  const Vector v = dct2((Vector(2) << 1.0, -1.0).finished());
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], std::sqrt(2.0), 1e-15);
}

TEST(Dct2, SinglePointIsIdentity) {
  EXPECT_EQ(dct2(Vector::Constant(1, 5.0))[0], 5.0);
}

TEST(Dct2, MatchesLongDoubleReference) {
  for (Eigen::Index N : {3, 8, 31, 196}) {
    const Vector x = gaussian(N, 1, static_cast<std::uint64_t>(N));
    EXPECT_LT((dct2(x) - reference_dct(x)).cwiseAbs().maxCoeff(), 1e-12) << "N=" << N;
  }
}

TEST(Dct2, EmptyInputThrows) {
  EXPECT_THROW(dct2(Vector()), InvalidArgument);
  EXPECT_THROW(idct(Vector()), InvalidArgument);
}

TEST(Idct, InvertsHandCases) {
  const Vector c = idct((Vector(4) << 2.0 * 3.0, 0, 0, 0).finished());
  for (int n = 0; n < 4; ++n) EXPECT_NEAR(c[n], 3.0, 1e-15);
  const Vector v = idct((Vector(2) << 0.0, std::sqrt(2.0)).finished());
  EXPECT_NEAR(v[0], 1.0, 1e-15);
  EXPECT_NEAR(v[1], -1.0, 1e-15);
}

TEST(Idct, RoundTripOnRandomSignals) {
  auto gen = RngSeed(5).engine();
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vector x(196);
    for (auto& v : x) v = u(gen);
    worst = std::max(worst, (idct(dct2(x)) - x).cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(DctMatrix, Orthonormal) {
  for (Eigen::Index N : {1, 2, 5, 17, 64, 128, 196, 256}) {
    const Matrix G = dct_matrix(N);
    EXPECT_LT((G.transpose() * G - Matrix::Identity(N, N)).cwiseAbs().maxCoeff(), 1e-10) << "N=" << N;
  }
}

TEST(DctPlan, AgreesWithDirectPath) {
  const DctPlan plan(96);
  const Matrix x = gaussian(96, 5, 9, 3.0);
  const Matrix fast = plan.forward(x);
  for (Eigen::Index d = 0; d < 5; ++d) EXPECT_LT((fast.col(d) - dct2(x.col(d))).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((plan.inverse(fast) - x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(plan.forward(Matrix::Zero(4, 1)), InvalidArgument);
}

TEST(DctProperties, ParsevalAndLinearity) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Eigen::Index N = 1 + static_cast<Eigen::Index>(s * 7 % 120);
    const Vector x = gaussian(N, 1, s);
    const Vector y = gaussian(N, 1, s + 1000);
    EXPECT_LT(std::abs(x.squaredNorm() - dct2(x).squaredNorm()) / x.squaredNorm(), 1e-10);
    const double a = 0.5 + static_cast<double>(s), b = -1.25;
    EXPECT_LT((dct2(a * x + b * y) - (a * dct2(x) + b * dct2(y))).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + a));
  }
}

TEST(DctBatch, ColumnwiseTransform) {
  Matrix data(16, 3);
  const Vector col = gaussian(16, 1, 4);
  data << col, col, col;
  const SpectrumBatch s = dct_batch(MotionSequence(data));
  EXPECT_EQ(s.col(0), s.col(1));
  EXPECT_EQ(s.col(1), s.col(2));
  EXPECT_EQ(dct_batch(MotionSequence(Matrix(col))).col(0), dct2(col));
}

TEST(DctBatch, ConstantMotion) {
  const Eigen::RowVector3d v(1.0, -2.0, 0.5);
  const Matrix data = v.replicate(9, 1);
  const SpectrumBatch s = dct_batch(MotionSequence(data));
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(s(0, d), 3.0 * v[d], 1e-14);
  EXPECT_LT(s.bottomRows(8).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FilterLowfreq, FullBandIdentityAndEmptyBand) {
  const MotionSequence m(gaussian(40, 3, 2));
  EXPECT_LT((filter_lowfreq(m, 40).data() - m.data()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(filter_lowfreq(m, 0).data(), Matrix::Zero(40, 3));
}

TEST(FilterLowfreq, SingleCoefficientGivesColumnMeans) {
  const MotionSequence m(gaussian(25, 4, 3));
  const Matrix f = filter_lowfreq(m, 1).data();
  for (Eigen::Index d = 0; d < 4; ++d)
    EXPECT_LT((f.col(d).array() - m.data().col(d).mean()).abs().maxCoeff(), 1e-12);
}

TEST(FilterLowfreq, Idempotent) {
  const MotionSequence m(gaussian(33, 2, 8));
  for (Eigen::Index K : {1, 5, 16, 32}) {
    const auto once = filter_lowfreq(m, K);
    EXPECT_LT((filter_lowfreq(once, K).data() - once.data()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(FilterLowfreq, OutOfRangeK) {
  const MotionSequence m(gaussian(8, 1, 1));
  EXPECT_THROW(filter_lowfreq(m, -1), InvalidArgument);
  EXPECT_THROW(filter_lowfreq(m, 9), InvalidArgument);
}

TEST(SpectralEnergy, SumsOverDimensions) {
  const MotionSequence m(gaussian(30, 4, 12));
  const Vector e = spectral_energy(dct_batch(m));
  EXPECT_NEAR(e.sum(), m.data().squaredNorm(), 1e-9 * m.data().squaredNorm());

  const Vector c = spectral_energy(dct_batch(MotionSequence(Matrix::Constant(10, 2, 3.0))));
  EXPECT_NEAR(c[0], 2 * 10 * 9.0, 1e-12);
  EXPECT_LT(c.tail(9).maxCoeff(), 1e-24);

  EXPECT_EQ(spectral_energy(dct_batch(MotionSequence::zeros(6, 2))), Vector::Zero(6));

  const Vector p = spectral_energy(dct_batch(gen_powerlaw_motion(64, 1, 2.0, RngSeed(1))));
  for (Eigen::Index k = 0; k < 64; ++k) EXPECT_NEAR(p[k], std::pow(k + 1.0, -2.0), 1e-12);
}

TEST(ContiguousBins, NearEqualPartition) {
  const auto e = contiguous_bins(10, 3);
  ASSERT_EQ(e.size(), 4u);
  EXPECT_EQ(e.front(), 0);
  EXPECT_EQ(e.back(), 10);
  for (std::size_t b = 0; b + 1 < e.size(); ++b) {
    EXPECT_GE(e[b + 1] - e[b], 3);
    EXPECT_LE(e[b + 1] - e[b], 4);
  }
  EXPECT_THROW(contiguous_bins(4, 5), InvalidArgument);
  EXPECT_THROW(contiguous_bins(4, 0), InvalidArgument);
}

}  // namespace
}  // namespace freqdiff
