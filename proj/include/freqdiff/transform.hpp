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

#include <cmath>
#include <numbers>
#include <vector>

#include "freqdiff/common.hpp"
#include "freqdiff/motion.hpp"

namespace freqdiff {

/// Orthonormal DCT-II coefficients of one signal, frequency index ascending.
using Spectrum = Vector;
/// Column d holds the spectrum of feature dimension d; row k is frequency k.
using SpectrumBatch = Matrix;

namespace detail {

/// cos(pi (2n+1) k / 2N) with the integer phase reduced modulo 4N first, so
/// the argument passed to std::cos stays in [0, 2pi).
inline double dct_cos(Eigen::Index n, Eigen::Index k, Eigen::Index N) {
  const long long phase = (static_cast<long long>(2 * n + 1) * k) % (4LL * N);
  return std::cos(std::numbers::pi * static_cast<double>(phase) / (2.0 * static_cast<double>(N)));
}

}  // namespace detail

/// Normalization factor: sqrt(1/N) for k = 0, sqrt(2/N) otherwise.
inline double dct_alpha(Eigen::Index k, Eigen::Index N) {
  return k == 0 ? std::sqrt(1.0 / static_cast<double>(N)) : std::sqrt(2.0 / static_cast<double>(N));
}

/// Direct O(N^2) orthonormal DCT-II. This is the reference path.
inline Spectrum dct2(const Eigen::Ref<const Vector>& signal) {
  const Eigen::Index N = signal.size();
  require(N >= 1, "dct2: empty input");
  require(signal.allFinite(), "dct2: non-finite input");
  Spectrum out(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    double acc = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) acc += signal[n] * detail::dct_cos(n, k, N);
    out[k] = dct_alpha(k, N) * acc;
  }
  return out;
}

/// Direct O(N^2) inverse of dct2 (the orthonormal DCT-III).
inline Vector idct(const Eigen::Ref<const Vector>& spectrum) {
  const Eigen::Index N = spectrum.size();
  require(N >= 1, "idct: empty input");
  require(spectrum.allFinite(), "idct: non-finite input");
  Vector out(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < N; ++k) acc += dct_alpha(k, N) * spectrum[k] * detail::dct_cos(n, k, N);
    out[n] = acc;
  }
  return out;
}

/// The N x N transform matrix G with G(k, n) = alpha(k) cos(pi (2n+1) k / 2N),
/// so dct2(x) = G x and idct(v) = G^T v.
inline Matrix dct_matrix(Eigen::Index N) {
  require(N >= 1, "dct_matrix: N must be positive");
  Matrix G(N, N);
  for (Eigen::Index k = 0; k < N; ++k)
    for (Eigen::Index n = 0; n < N; ++n) G(k, n) = dct_alpha(k, N) * detail::dct_cos(n, k, N);
  return G;
}

/// Cached transform matrix for repeated column transforms of one length.
/// Agrees with the direct path to rounding (checked in the unit tests).
class DctPlan {
 public:
  explicit DctPlan(Eigen::Index N) : G_(dct_matrix(N)) {}

  Eigen::Index size() const noexcept { return G_.rows(); }
  const Matrix& matrix() const noexcept { return G_; }

  /// Transforms every column of `x` (time along rows).
  Matrix forward(const Eigen::Ref<const Matrix>& x) const {
    require(x.rows() == size(), "DctPlan::forward: length mismatch");
    return G_ * x;
  }

  Matrix inverse(const Eigen::Ref<const Matrix>& v) const {
    require(v.rows() == size(), "DctPlan::inverse: length mismatch");
    return G_.transpose() * v;
  }

 private:
  Matrix G_;
};

/// Per-dimension DCT along the time axis.
inline SpectrumBatch dct_batch(const MotionSequence& motion) {
  SpectrumBatch out(motion.frames(), motion.dims());
  for (Eigen::Index d = 0; d < motion.dims(); ++d) out.col(d) = dct2(motion.data().col(d));
  return out;
}

/// Per-dimension inverse DCT; the result is a time-domain frames x dims array.
inline Matrix idct_batch(const SpectrumBatch& batch) {
  require(batch.rows() >= 1 && batch.cols() >= 1, "idct_batch: empty batch");
  Matrix out(batch.rows(), batch.cols());
  for (Eigen::Index d = 0; d < batch.cols(); ++d) out.col(d) = idct(batch.col(d));
  return out;
}

/// Keeps the first K DCT coefficients of every dimension and transforms back.
/// K = frames is the identity (to rounding); K = 0 gives zeros.
inline MotionSequence filter_lowfreq(const MotionSequence& motion, Eigen::Index K) {
  require(K >= 0 && K <= motion.frames(), "filter_lowfreq: K out of range [0, frames]");
  SpectrumBatch coeffs = dct_batch(motion);
  coeffs.bottomRows(motion.frames() - K).setZero();
  return MotionSequence(idct_batch(coeffs), motion.frame_rate_hz());
}

/// Energy per frequency summed over dimensions: result[k] = sum_d coeffs(k, d)^2.
inline Vector spectral_energy(const SpectrumBatch& batch) {
  return batch.array().square().rowwise().sum().matrix();
}

/// Boundaries of `n_bins` contiguous near-equal bins over [0, N): bin b is
/// [edges[b], edges[b+1]) with edges[b] = floor(b N / n_bins).
inline std::vector<Eigen::Index> contiguous_bins(Eigen::Index N, Eigen::Index n_bins) {
  require(n_bins >= 1 && n_bins <= N, "contiguous_bins: need 1 <= n_bins <= N");
  std::vector<Eigen::Index> edges(static_cast<std::size_t>(n_bins) + 1);
  for (Eigen::Index b = 0; b <= n_bins; ++b) edges[static_cast<std::size_t>(b)] = (b * N) / n_bins;
  return edges;
}

}  // namespace freqdiff
