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

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "freqdiff/common.hpp"

namespace freqdiff {

/// Rows are items, columns are feature dimensions.
using FeatureSet = Matrix;

struct GaussianStats {
  Vector mean;
  Matrix cov;

  Eigen::Index dim() const noexcept { return mean.size(); }
};

inline constexpr int kDefaultDiversityPairs = 300;

/// Sample mean and unbiased (1/(n-1)) covariance, symmetrized.
inline GaussianStats gaussian_stats(const FeatureSet& features) {
  require(features.rows() >= 2, "gaussian_stats: need at least 2 rows");
  require(features.cols() >= 1, "gaussian_stats: need at least 1 column");
  GaussianStats s;
  s.mean = features.colwise().mean().transpose();
  const Matrix centered = features.rowwise() - s.mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(features.rows() - 1);
  s.cov = 0.5 * (cov + cov.transpose());
  return s;
}

/// Principal square root of a symmetric PSD matrix by eigendecomposition;
/// eigenvalues below zero are clamped to zero.
inline Matrix sqrtm_psd(const Matrix& m) {
  require(m.rows() == m.cols() && m.rows() >= 1, "sqrtm_psd: matrix must be square and non-empty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw InvalidArgument("sqrtm_psd: matrix is not symmetric");
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("sqrtm_psd: eigendecomposition failed");
  const Vector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

/// Frechet distance between two Gaussians:
/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2), clamped at 0.
inline double fid(const GaussianStats& a, const GaussianStats& b) {
  require(a.dim() == b.dim() && a.cov.rows() == a.dim() && b.cov.rows() == b.dim(), "fid: dimension mismatch");
  const Matrix root_a = sqrtm_psd(a.cov);
  Matrix inner = root_a * b.cov * root_a;
  inner = 0.5 * (inner + inner.transpose());
  const double cross = sqrtm_psd(inner).trace();
  const double value = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * cross;
  return std::max(0.0, value);
}

/// Mean Euclidean distance over S index pairs drawn with replacement across
/// pairs; the two indices of a pair always differ.
inline double diversity(const FeatureSet& features, int pairs, RngSeed seed) {
  require(features.rows() >= 2, "diversity: need at least 2 items");
  require(pairs >= 1, "diversity: S must be positive");
  auto gen = seed.engine();
  std::uniform_int_distribution<Eigen::Index> pick(0, features.rows() - 1);
  double acc = 0.0;
  for (int s = 0; s < pairs; ++s) {
    const Eigen::Index i = pick(gen);
    Eigen::Index j = pick(gen);
    while (j == i) j = pick(gen);
    acc += (features.row(i) - features.row(j)).norm();
  }
  return acc / static_cast<double>(pairs);
}

}  // namespace freqdiff
