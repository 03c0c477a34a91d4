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
#include <optional>
#include <string>
#include <vector>

#include "freqdiff/common.hpp"
#include "freqdiff/motion.hpp"
#include "freqdiff/parallel.hpp"
#include "freqdiff/schedule.hpp"
#include "freqdiff/transform.hpp"

namespace freqdiff {

// The closed-form steps below act elementwise, so they apply unchanged to
// time-domain arrays and to their DCT coefficients.

/// x_t = sqrt(abar) x0 + sqrt(1 - abar) eps.
inline Matrix forward_sample(const Matrix& x0, double alpha_bar, const Matrix& eps) {
  require(x0.rows() == eps.rows() && x0.cols() == eps.cols(), "forward_sample: shape mismatch");
  require(alpha_bar > 0.0 && alpha_bar <= 1.0, "forward_sample: alpha_bar must lie in (0, 1]");
  return std::sqrt(alpha_bar) * x0 + std::sqrt(1.0 - alpha_bar) * eps;
}

inline MotionSequence forward_sample(const MotionSequence& x0, const NoiseSchedule& schedule, std::size_t t,
                                     const MotionSequence& eps) {
  require(x0.same_shape(eps), "forward_sample: shape mismatch");
  return MotionSequence(forward_sample(x0.data(), schedule.alpha_bar(t), eps.data()));
}

/// The noise that maps x0 to x_t under the forward formula.
inline Matrix oracle_eps(const Matrix& x0, const Matrix& x_t, double alpha_bar) {
  require(x0.rows() == x_t.rows() && x0.cols() == x_t.cols(), "oracle_eps: shape mismatch");
  require(alpha_bar > 0.0, "oracle_eps: alpha_bar must be positive");
  if (!(alpha_bar < 1.0)) throw InvalidArgument("oracle_eps: undefined for alpha_bar = 1");
  return (x_t - std::sqrt(alpha_bar) * x0) / std::sqrt(1.0 - alpha_bar);
}

inline MotionSequence oracle_eps(const MotionSequence& x0, const MotionSequence& x_t, const NoiseSchedule& schedule,
                                 std::size_t t) {
  require(x0.same_shape(x_t), "oracle_eps: shape mismatch");
  return MotionSequence(oracle_eps(x0.data(), x_t.data(), schedule.alpha_bar(t)));
}

/// Clean-signal estimate implied by a noise prediction: (x_t - sqrt(1-abar) eps) / sqrt(abar).
inline Matrix implied_x0(const Matrix& x_t, const Matrix& eps_hat, double alpha_bar) {
  require(x_t.rows() == eps_hat.rows() && x_t.cols() == eps_hat.cols(), "implied_x0: shape mismatch");
  require(alpha_bar > 0.0 && alpha_bar <= 1.0, "implied_x0: alpha_bar must lie in (0, 1]");
  return (x_t - std::sqrt(1.0 - alpha_bar) * eps_hat) / std::sqrt(alpha_bar);
}

/// One reverse step in cumulative-alpha form:
/// x_{t-1} = sqrt(abar_{t-1}) (x_t - sqrt(1-abar_t) eps_hat) / sqrt(abar_t) + sqrt(1-abar_{t-1}) z.
inline Matrix ddpm_reverse_step(const Matrix& x_t, const Matrix& eps_hat, const NoiseSchedule& schedule,
                                std::size_t t, const Matrix& z) {
  if (t == 0) throw InvalidArgument("ddpm_reverse_step: t must be >= 1");
  schedule.check_step(t);
  require(x_t.rows() == z.rows() && x_t.cols() == z.cols(), "ddpm_reverse_step: shape mismatch");
  const double prev = schedule.alpha_bar(t - 1);
  return std::sqrt(prev) * implied_x0(x_t, eps_hat, schedule.alpha_bar(t)) + std::sqrt(1.0 - prev) * z;
}

inline MotionSequence ddpm_reverse_step(const MotionSequence& x_t, const MotionSequence& eps_hat,
                                        const NoiseSchedule& schedule, std::size_t t, const MotionSequence& z) {
  require(x_t.same_shape(eps_hat) && x_t.same_shape(z), "ddpm_reverse_step: shape mismatch");
  return MotionSequence(ddpm_reverse_step(x_t.data(), eps_hat.data(), schedule, t, z.data()));
}

/// Frequencies k < k_split form the low band, the rest the high band.
struct BandSplit {
  Eigen::Index k_split = 0;

  void validate(Eigen::Index frames) const {
    require(k_split > 0 && k_split < frames,
            "BandSplit: k_split must lie in (0, " + std::to_string(frames) + ")");
  }
  Eigen::Index low_size() const noexcept { return k_split; }
  Eigen::Index high_size(Eigen::Index frames) const noexcept { return frames - k_split; }
};

enum class Band { low = 0, high = 1 };

/// ||band(estimate) - band(reference)||_2 / ||band(reference)||_2 over DCT
/// coefficient rows of the band.
inline double band_error(const SpectrumBatch& estimate, const SpectrumBatch& reference, const BandSplit& split,
                         Band band) {
  const Eigen::Index n = reference.rows();
  const Eigen::Index lo = band == Band::low ? 0 : split.k_split;
  const Eigen::Index len = band == Band::low ? split.k_split : n - split.k_split;
  const double ref = reference.middleRows(lo, len).norm();
  return (estimate.middleRows(lo, len) - reference.middleRows(lo, len)).norm() / ref;
}

/// One row of a long-format reverse-trajectory trace.
struct TraceRow {
  std::size_t t;
  Band band;
  double error;
  std::size_t trial;
};

struct CoarseToFineResult {
  /// Per trial: first step (scanning t downward) with band error <= threshold;
  /// -1 when the band never crosses.
  std::vector<long> low_crossing;
  std::vector<long> high_crossing;
  double mean_low = 0.0;
  double mean_high = 0.0;
  std::vector<TraceRow> trace;

  std::size_t trials_ordered() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < low_crossing.size(); ++i) n += low_crossing[i] >= high_crossing[i];
    return n;
  }
};

struct DependencyResult {
  std::vector<double> clean_hf_error;      ///< per trial
  std::vector<double> corrupted_hf_error;  ///< per trial
  double mean_clean = 0.0;
  double mean_corrupted = 0.0;
};

namespace detail {

inline void check_experiment_inputs(const SpectrumBatch& reference, const BandSplit& split, std::size_t n_trials) {
  split.validate(reference.rows());
  require(n_trials >= 1, "experiment: n_trials must be >= 1");
  // Bands at roundoff level relative to the whole spectrum count as empty.
  const double floor = 1e-12 * reference.norm();
  if (!(reference.topRows(split.k_split).norm() > floor))
    throw InvalidArgument("experiment: low band with zero reference energy");
  if (!(reference.bottomRows(reference.rows() - split.k_split).norm() > floor))
    throw InvalidArgument("experiment: high band with zero reference energy");
}

/// Independent noise streams of one trial, each drawn in the time domain and
/// moved to DCT coefficients (white noise stays white under the orthonormal
/// transform).
class TrialNoise {
 public:
  TrialNoise(RngSeed trial_seed, const DctPlan& plan, Eigen::Index dims)
      : plan_(plan),
        dims_(dims),
        init_(trial_seed.stream(0).engine()),
        zeta_(trial_seed.stream(1).engine()),
        z_(trial_seed.stream(2).engine()),
        corruption_(trial_seed.stream(3).engine()) {}

  Matrix init() { return draw(init_); }
  Matrix zeta() { return draw(zeta_); }
  Matrix z() { return draw(z_); }
  Matrix corruption() { return draw(corruption_); }

 private:
  Matrix draw(std::mt19937_64& gen) { return plan_.forward(standard_normal(plan_.size(), dims_, gen)); }

  const DctPlan& plan_;
  Eigen::Index dims_;
  std::mt19937_64 init_;
  std::mt19937_64 zeta_;
  std::mt19937_64 z_;
  std::mt19937_64 corruption_;
};

inline long first_crossing(const std::vector<double>& errors_by_t, double threshold) {
  for (std::size_t i = errors_by_t.size(); i-- > 0;)
    if (errors_by_t[i] <= threshold) return static_cast<long>(i);
  return -1;
}

}  // namespace detail

/// Reverse trajectories driven by the shrinkage denoiser
/// eps_hat = abar_t eps_true + (1 - abar_t) zeta, starting from a forward
/// sample at the last step. At every step the band errors of the implied x0
/// are recorded, saturated at 1 (no better than predicting zero).
inline CoarseToFineResult coarse_to_fine_experiment(const MotionSequence& x0, const NoiseSchedule& schedule,
                                                    const BandSplit& split, double err_threshold,
                                                    std::size_t n_trials, RngSeed seed, std::size_t threads = 1) {
  require(err_threshold > 0.0 && err_threshold <= 1.0, "coarse_to_fine: err_threshold must lie in (0, 1]");
  const DctPlan plan(x0.frames());
  const SpectrumBatch reference = plan.forward(x0.data());
  detail::check_experiment_inputs(reference, split, n_trials);
  const std::size_t T = schedule.steps();

  std::vector<std::vector<double>> low(n_trials), high(n_trials);
  parallel_for(n_trials, threads, [&](std::size_t trial) {
    detail::TrialNoise noise(seed.stream(trial), plan, x0.dims());
    low[trial].assign(T, 1.0);
    high[trial].assign(T, 1.0);
    Matrix x = forward_sample(reference, schedule.alpha_bar(T - 1), noise.init());
    for (std::size_t t = T; t-- > 0;) {
      const double abar = schedule.alpha_bar(t);
      const Matrix eps_true = oracle_eps(reference, x, abar);
      const Matrix eps_hat = abar * eps_true + (1.0 - abar) * noise.zeta();
      const Matrix x0_hat = implied_x0(x, eps_hat, abar);
      low[trial][t] = std::min(1.0, band_error(x0_hat, reference, split, Band::low));
      high[trial][t] = std::min(1.0, band_error(x0_hat, reference, split, Band::high));
      if (t >= 1) x = ddpm_reverse_step(x, eps_hat, schedule, t, t > 1 ? noise.z() : Matrix::Zero(x.rows(), x.cols()));
    }
  });

  CoarseToFineResult result;
  result.trace.reserve(n_trials * T * 2);
  for (std::size_t trial = 0; trial < n_trials; ++trial) {
    result.low_crossing.push_back(detail::first_crossing(low[trial], err_threshold));
    result.high_crossing.push_back(detail::first_crossing(high[trial], err_threshold));
    result.mean_low += static_cast<double>(result.low_crossing.back());
    result.mean_high += static_cast<double>(result.high_crossing.back());
    for (std::size_t t = T; t-- > 0;) {
      result.trace.push_back({t, Band::low, low[trial][t], trial});
      result.trace.push_back({t, Band::high, high[trial][t], trial});
    }
  }
  result.mean_low /= static_cast<double>(n_trials);
  result.mean_high /= static_cast<double>(n_trials);
  return result;
}

/// Paired reverse runs per trial, with and without corruption of the low band
/// of every intermediate x0 estimate.
///
/// The denoiser here is context-conditioned: low-band noise is predicted with
/// confidence abar_t as above, while high-band confidence is abar_t * q with
/// q = 1 / (1 + e_L^2), e_L the relative low-band error of the current
/// (possibly corrupted) estimate. Both conditions consume identical noise
/// streams; only the corruption term differs. Reports the relative high-band
/// error of the final sample (last step taken with z = 0).
inline DependencyResult dependency_experiment(const MotionSequence& x0, const NoiseSchedule& schedule,
                                              const BandSplit& split, double corruption_scale,
                                              std::size_t n_trials, RngSeed seed, std::size_t threads = 1) {
  require(corruption_scale >= 0.0 && std::isfinite(corruption_scale),
          "dependency_experiment: corruption_scale must be >= 0");
  require(schedule.steps() >= 2, "dependency_experiment: need at least two steps");
  const DctPlan plan(x0.frames());
  const SpectrumBatch reference = plan.forward(x0.data());
  detail::check_experiment_inputs(reference, split, n_trials);
  const std::size_t T = schedule.steps();
  const Eigen::Index k = split.k_split;
  const Eigen::Index n_high = reference.rows() - k;
  const double low_norm = reference.topRows(k).norm();

  auto run = [&](std::size_t trial, bool corrupt) {
    detail::TrialNoise noise(seed.stream(trial), plan, x0.dims());
    Matrix x = forward_sample(reference, schedule.alpha_bar(T - 1), noise.init());
    for (std::size_t t = T - 1; t >= 1; --t) {
      const double abar = schedule.alpha_bar(t);
      const Matrix eps_true = oracle_eps(reference, x, abar);
      const Matrix zeta = noise.zeta();
      const Matrix corruption = noise.corruption();
      const Matrix z = t > 1 ? noise.z() : Matrix::Zero(x.rows(), x.cols());

      Matrix eps_hat = abar * eps_true + (1.0 - abar) * zeta;
      Matrix x0_hat = implied_x0(x, eps_hat, abar);
      if (corrupt && corruption_scale != 0.0) x0_hat.topRows(k) += corruption_scale * corruption.topRows(k);

      const double e_low = (x0_hat.topRows(k) - reference.topRows(k)).norm() / low_norm;
      const double confidence = abar / (1.0 + e_low * e_low);
      eps_hat.bottomRows(n_high) =
          confidence * eps_true.bottomRows(n_high) + (1.0 - confidence) * zeta.bottomRows(n_high);
      x0_hat.bottomRows(n_high) = implied_x0(x.bottomRows(n_high), eps_hat.bottomRows(n_high), abar);

      // Re-derive the noise prediction consistent with the (possibly edited) estimate.
      const Matrix eps_step = oracle_eps(x0_hat, x, abar);
      x = ddpm_reverse_step(x, eps_step, schedule, t, z);
    }
    return band_error(x, reference, split, Band::high);
  };

  DependencyResult result;
  result.clean_hf_error.assign(n_trials, 0.0);
  result.corrupted_hf_error.assign(n_trials, 0.0);
  parallel_for(n_trials, threads, [&](std::size_t trial) {
    result.clean_hf_error[trial] = run(trial, false);
    result.corrupted_hf_error[trial] = run(trial, true);
  });
  for (std::size_t i = 0; i < n_trials; ++i) {
    result.mean_clean += result.clean_hf_error[i];
    result.mean_corrupted += result.corrupted_hf_error[i];
  }
  result.mean_clean /= static_cast<double>(n_trials);
  result.mean_corrupted /= static_cast<double>(n_trials);
  return result;
}

}  // namespace freqdiff
