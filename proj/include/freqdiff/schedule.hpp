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
#include <string>
#include <utility>
#include <vector>

#include "freqdiff/common.hpp"

namespace freqdiff {

/// Variance-preserving forward-process schedule. Step index t in [0, T)
/// corresponds to diffusion time t + 1.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> betas) : betas_(std::move(betas)) {
    require(!betas_.empty(), "NoiseSchedule: need at least one step");
    alphas_.reserve(betas_.size());
    alpha_bars_.reserve(betas_.size());
    double running = 1.0;
    for (std::size_t t = 0; t < betas_.size(); ++t) {
      const double b = betas_[t];
      require(b > 0.0 && b < 1.0, "NoiseSchedule: beta[" + std::to_string(t) + "] must lie in (0, 1)");
      alphas_.push_back(1.0 - b);
      running *= 1.0 - b;
      alpha_bars_.push_back(running);
    }
  }

  std::size_t steps() const noexcept { return betas_.size(); }
  const std::vector<double>& betas() const noexcept { return betas_; }
  const std::vector<double>& alphas() const noexcept { return alphas_; }
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bars_; }

  double alpha_bar(std::size_t t) const {
    check_step(t);
    return alpha_bars_[t];
  }

  void check_step(std::size_t t) const {
    if (t >= steps())
      throw InvalidArgument("step " + std::to_string(t) + " out of range [0, " + std::to_string(steps()) + ")");
  }

 private:
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
};

inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

/// Betas interpolated linearly from beta_start to beta_end, both inclusive.
inline NoiseSchedule linear_beta(std::size_t steps, double beta_start = kDefaultBetaStart,
                                 double beta_end = kDefaultBetaEnd) {
  require(steps >= 1, "linear_beta: T must be >= 1");
  require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0,
          "linear_beta: need 0 < beta_start <= beta_end < 1");
  std::vector<double> betas(steps);
  if (steps == 1) {
    betas[0] = beta_start;
  } else {
    const double span = beta_end - beta_start;
    for (std::size_t t = 0; t < steps; ++t)
      betas[t] = beta_start + span * static_cast<double>(t) / static_cast<double>(steps - 1);
    betas.back() = beta_end;
  }
  return NoiseSchedule(std::move(betas));
}

/// Noise-energy profile of the zero-drift model: per-step g^2 and its
/// running sum, the discrete form of the integral of g^2 from 0 to t.
class GProfile {
 public:
  explicit GProfile(std::vector<double> g_squared) : g_squared_(std::move(g_squared)) {
    require(!g_squared_.empty(), "GProfile: need at least one step");
    cumulative_.reserve(g_squared_.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < g_squared_.size(); ++t) {
      require(g_squared_[t] >= 0.0 && std::isfinite(g_squared_[t]),
              "GProfile: g^2[" + std::to_string(t) + "] must be finite and >= 0");
      acc += g_squared_[t];
      cumulative_.push_back(acc);
    }
  }

  std::size_t steps() const noexcept { return g_squared_.size(); }
  const std::vector<double>& g_squared() const noexcept { return g_squared_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }

 private:
  std::vector<double> g_squared_;
  std::vector<double> cumulative_;
};

inline GProfile constant_g(std::size_t steps, double c) {
  require(steps >= 1, "constant_g: T must be >= 1");
  require(c >= 0.0 && std::isfinite(c), "constant_g: c must be >= 0");
  return GProfile(std::vector<double>(steps, c));
}

/// Accumulated noise energy up to and including step t.
inline double noise_energy(const GProfile& profile, std::size_t t) {
  if (t >= profile.steps())
    throw InvalidArgument("noise_energy: step " + std::to_string(t) + " out of range [0, " +
                          std::to_string(profile.steps()) + ")");
  return profile.cumulative()[t];
}

}  // namespace freqdiff
