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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "freqdiff/common.hpp"
#include "freqdiff/motion.hpp"
#include "freqdiff/parallel.hpp"
#include "freqdiff/schedule.hpp"
#include "freqdiff/transform.hpp"

namespace freqdiff {

/// Power per frequency index k (non-negative).
using PsdCurve = Vector;
/// Initial power over accumulated noise energy, per frequency index k.
using SnrCurve = Vector;

/// Samples per Monte Carlo chunk. Chunk c draws from seed.stream(c), so the
/// estimate is identical for any worker count.
inline constexpr std::size_t kMonteCarloChunk = 4096;

/// Power of the diffused signal: initial power plus accumulated noise energy.
inline PsdCurve theoretical_psd(const PsdCurve& power0, const GProfile& profile, std::size_t t) {
  require(power0.size() >= 1, "theoretical_psd: empty power curve");
  require((power0.array() >= 0.0).all(), "theoretical_psd: power must be non-negative");
  return (power0.array() + noise_energy(profile, t)).matrix();
}

/// |dct2(x0)|^2, the initial power of a one-dimensional motion.
inline PsdCurve initial_power(const MotionSequence& x0) {
  require(x0.dims() == 1, "initial_power: expected a one-dimensional motion");
  return dct2(x0.data().col(0)).array().square().matrix();
}

namespace detail {

struct McChunk {
  Vector sum;
  Vector sum_sq;
};

/// Runs `per_chunk(spectrum0, noise_spectra, acc)` over seeded chunks of white
/// time-domain noise with per-frame variance `energy`.
template <typename Accumulate>
std::vector<McChunk> run_noise_chunks(const MotionSequence& x0, double energy, std::size_t n_samples,
                                      RngSeed seed, std::size_t threads, Accumulate&& accumulate) {
  const Eigen::Index N = x0.frames();
  const Spectrum spectrum0 = dct2(x0.data().col(0));
  const DctPlan plan(N);
  const double scale = std::sqrt(energy);
  const std::size_t n_chunks = (n_samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<McChunk> chunks(n_chunks);
  parallel_for(n_chunks, threads, [&](std::size_t c) {
    const std::size_t begin = c * kMonteCarloChunk;
    const auto m = static_cast<Eigen::Index>(std::min(kMonteCarloChunk, n_samples - begin));
    auto gen = seed.stream(c).engine();
    const Matrix noise = scale * standard_normal(N, m, gen);
    const Matrix noise_spectra = plan.forward(noise);
    McChunk acc{Vector::Zero(N), Vector::Zero(N)};
    accumulate(spectrum0, noise_spectra, acc);
    chunks[c] = std::move(acc);
  });
  return chunks;
}

}  // namespace detail

/// Monte Carlo estimate of E|dct2(x0 + eta)|^2 with eta white, per-frame
/// variance equal to the accumulated noise energy at step t.
inline PsdCurve estimate_psd_mc(const MotionSequence& x0, const GProfile& profile, std::size_t t,
                                std::size_t n_samples, RngSeed seed, std::size_t threads = 1) {
  require(x0.dims() == 1, "estimate_psd_mc: expected a one-dimensional motion");
  require(n_samples >= 1, "estimate_psd_mc: n_samples must be >= 1");
  const double energy = noise_energy(profile, t);
  const auto chunks = detail::run_noise_chunks(
      x0, energy, n_samples, seed, threads, [](const Spectrum& s0, const Matrix& noise, detail::McChunk& acc) {
        acc.sum = (noise.colwise() + s0).array().square().rowwise().sum().matrix();
      });
  Vector total = Vector::Zero(x0.frames());
  for (const auto& c : chunks) total += c.sum;
  return total / static_cast<double>(n_samples);
}

struct CrossTermEstimate {
  Vector mean;       ///< sample mean of dct2(x0)[k] * dct2(eta)[k]
  Vector std_error;  ///< sample standard deviation over sqrt(n)
};

/// Monte Carlo estimate of the signal/noise cross term per frequency.
inline CrossTermEstimate cross_term_mc(const MotionSequence& x0, const GProfile& profile, std::size_t t,
                                       std::size_t n_samples, RngSeed seed, std::size_t threads = 1) {
  require(x0.dims() == 1, "cross_term_mc: expected a one-dimensional motion");
  require(n_samples >= 2, "cross_term_mc: n_samples must be >= 2");
  const double energy = noise_energy(profile, t);
  const auto chunks = detail::run_noise_chunks(
      x0, energy, n_samples, seed, threads, [](const Spectrum& s0, const Matrix& noise, detail::McChunk& acc) {
        const Matrix products = noise.array().colwise() * s0.array();
        acc.sum = products.rowwise().sum();
        acc.sum_sq = products.array().square().rowwise().sum().matrix();
      });
  const Eigen::Index N = x0.frames();
  Vector sum = Vector::Zero(N);
  Vector sum_sq = Vector::Zero(N);
  for (const auto& c : chunks) {
    sum += c.sum;
    sum_sq += c.sum_sq;
  }
  const double n = static_cast<double>(n_samples);
  CrossTermEstimate out;
  out.mean = sum / n;
  const Vector variance = ((sum_sq.array() - n * out.mean.array().square()) / (n - 1.0)).max(0.0).matrix();
  out.std_error = (variance.array() / n).sqrt().matrix();
  return out;
}

/// Initial power over accumulated noise energy at step t.
inline SnrCurve snr_curve(const PsdCurve& power0, const GProfile& profile, std::size_t t) {
  require((power0.array() >= 0.0).all(), "snr_curve: power must be non-negative");
  const double energy = noise_energy(profile, t);
  if (!(energy > 0.0)) throw InvalidArgument("SNR undefined at t=" + std::to_string(t) + " with zero noise");
  return power0 / energy;
}

namespace detail {

inline bool snr_reached(double power, double cumulative, double snr_gamma) {
  return cumulative > 0.0 && power / cumulative <= snr_gamma;
}

inline void check_recovery_args(double power, double snr_gamma) {
  require(power > 0.0 && std::isfinite(power), "recovery_time: power must be > 0");
  require(snr_gamma > 0.0 && std::isfinite(snr_gamma), "recovery_time: gamma must be > 0");
}

}  // namespace detail

/// Smallest step t at which power / cumulative[t] <= snr_gamma, by linear scan.
inline std::optional<std::size_t> recovery_time_scan(double power, const GProfile& profile, double snr_gamma) {
  detail::check_recovery_args(power, snr_gamma);
  const auto& cum = profile.cumulative();
  for (std::size_t t = 0; t < cum.size(); ++t)
    if (detail::snr_reached(power, cum[t], snr_gamma)) return t;
  return std::nullopt;
}

/// Same result as recovery_time_scan, by bisection over the non-decreasing
/// cumulative energy.
inline std::optional<std::size_t> recovery_time_bisect(double power, const GProfile& profile, double snr_gamma) {
  detail::check_recovery_args(power, snr_gamma);
  const auto& cum = profile.cumulative();
  std::size_t lo = 0;
  std::size_t hi = cum.size();  // first index known to satisfy, or size() if none
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (detail::snr_reached(power, cum[mid], snr_gamma))
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo == cum.size()) return std::nullopt;
  return lo;
}

inline std::optional<std::size_t> recovery_time(double power, const GProfile& profile, double snr_gamma) {
  return recovery_time_bisect(power, profile, snr_gamma);
}

/// Energy distribution of a motion over contiguous frequency bands.
struct SpectrumReport {
  Vector energy;                    ///< per-k energy summed over dimensions
  std::vector<Eigen::Index> edges;  ///< band b covers [edges[b], edges[b+1])
  Vector fractions;                 ///< per-band share of total energy; zeros when zero_energy
  bool zero_energy = false;
};

inline SpectrumReport spectrum_report(const MotionSequence& motion, Eigen::Index n_bands) {
  require(n_bands >= 1 && n_bands <= motion.frames(), "spectrum_report: need 1 <= n_bands <= frames");
  SpectrumReport report;
  report.energy = spectral_energy(dct_batch(motion));
  report.edges = contiguous_bins(motion.frames(), n_bands);
  report.fractions = Vector::Zero(n_bands);
  const double total = report.energy.sum();
  if (!(total > 0.0)) {
    report.zero_energy = true;
    return report;
  }
  for (Eigen::Index b = 0; b < n_bands; ++b) {
    const auto lo = report.edges[static_cast<std::size_t>(b)];
    const auto hi = report.edges[static_cast<std::size_t>(b) + 1];
    report.fractions[b] = report.energy.segment(lo, hi - lo).sum() / total;
  }
  return report;
}

}  // namespace freqdiff
