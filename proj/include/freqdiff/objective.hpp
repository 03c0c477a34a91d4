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
#include <cstddef>
#include <span>
#include <string>

#include "freqdiff/common.hpp"
#include "freqdiff/motion.hpp"
#include "freqdiff/transform.hpp"

namespace freqdiff {

/// Weights of the training objective. lambda_s only reserves the slot of the
/// semantic term, which is not computed here.
struct LossWeights {
  double lambda_dct = 0.2;
  double lambda_simple = 1.0;
  double lambda_lf = 1.0;
  double lambda_s = 0.5;

  void validate() const {
    require(lambda_dct >= 0.0 && lambda_simple >= 0.0 && lambda_lf >= 0.0 && lambda_s >= 0.0,
            "LossWeights: weights must be non-negative");
  }
};

inline constexpr Eigen::Index kDefaultLowFreqK = 25;

namespace detail {

/// sum_t M_t ||a_t - b_t||^2 / sum_t M_t over rows.
inline double masked_row_mse(const Matrix& a, const Matrix& b, const FrameMask& mask) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "masked loss: shape mismatch");
  require(mask.size() == static_cast<std::size_t>(a.rows()), "masked loss: mask length does not match frames");
  const std::size_t valid = mask.count();
  if (valid == 0) throw InvalidArgument("masked loss: no valid frames");
  double acc = 0.0;
  for (Eigen::Index t = 0; t < a.rows(); ++t)
    if (mask[static_cast<std::size_t>(t)]) acc += (a.row(t) - b.row(t)).squaredNorm();
  return acc / static_cast<double>(valid);
}

}  // namespace detail

/// Masked time-domain MSE, normalized by the number of valid frames (not
/// elements).
inline double masked_mse(const MotionSequence& pred, const MotionSequence& target, const FrameMask& mask) {
  return detail::masked_row_mse(pred.data(), target.data(), mask);
}

/// Batch form: the mean over items of the per-item loss.
inline double masked_mse(std::span<const MotionSequence> pred, std::span<const MotionSequence> target,
                         std::span<const FrameMask> masks) {
  require(!pred.empty() && pred.size() == target.size() && pred.size() == masks.size(),
          "masked_mse: batch sizes differ");
  double acc = 0.0;
  for (std::size_t b = 0; b < pred.size(); ++b) acc += masked_mse(pred[b], target[b], masks[b]);
  return acc / static_cast<double>(pred.size());
}

/// Masked loss between a DCT-space prediction and dct_batch(target). The mask
/// selects coefficient rows by position, as in the per-frame loss.
inline double masked_dct_loss(const SpectrumBatch& pred_dct, const MotionSequence& target, const FrameMask& mask) {
  return detail::masked_row_mse(pred_dct, dct_batch(target), mask);
}

inline double masked_dct_loss(std::span<const SpectrumBatch> pred_dct, std::span<const MotionSequence> target,
                              std::span<const FrameMask> masks) {
  require(!pred_dct.empty() && pred_dct.size() == target.size() && pred_dct.size() == masks.size(),
          "masked_dct_loss: batch sizes differ");
  double acc = 0.0;
  for (std::size_t b = 0; b < pred_dct.size(); ++b) acc += masked_dct_loss(pred_dct[b], target[b], masks[b]);
  return acc / static_cast<double>(pred_dct.size());
}

/// masked_mse after keeping only the first K DCT coefficients of both inputs.
inline double lowfreq_loss(const MotionSequence& pred, const MotionSequence& target, const FrameMask& mask,
                           Eigen::Index K = kDefaultLowFreqK) {
  require(pred.same_shape(target), "lowfreq_loss: shape mismatch");
  require(K > 0 && K <= pred.frames(), "lowfreq_loss: K must lie in (0, frames]");
  return masked_mse(filter_lowfreq(pred, K), filter_lowfreq(target, K), mask);
}

enum class Stage { early, late };

/// 1 when the stage's loss is active at step t: early for t >= t_split
/// (high noise), late for t < t_split.
inline int timestep_gate(std::size_t t, std::size_t t_split, Stage stage) {
  const bool early = t >= t_split;
  return (stage == Stage::early) == early ? 1 : 0;
}

inline std::size_t default_t_split(std::size_t steps) { return steps / 2; }

/// L_diffusion + lambda_dct L_dct.
inline double total_loss(double l_diffusion, double l_dct, const LossWeights& weights) {
  require(l_diffusion >= 0.0 && l_dct >= 0.0, "total_loss: component losses must be non-negative");
  weights.validate();
  return l_diffusion + weights.lambda_dct * l_dct;
}

}  // namespace freqdiff
