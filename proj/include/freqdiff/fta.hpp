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
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freqdiff/common.hpp"
#include "freqdiff/transform.hpp"

namespace freqdiff {

/// Frames x model_dim intermediate representation fed to the attention block.
using FeatureSequence = Matrix;

struct FtaDims {
  Eigen::Index pe_dim = 64;
  Eigen::Index hidden = 128;
  Eigen::Index model_dim = 16;
};

inline constexpr double kDefaultLnEpsilon = 1e-5;

/// Weights of the timestep-conditioned attention block.
///
/// Row-vector convention: frames are rows, so Q = X~ w_q and the timestep MLP
/// maps column vectors (e = mlp_w2 silu(mlp_w1 pe + mlp_b1) + mlp_b2).
struct FtaParams {
  Matrix mlp_w1;  // hidden x pe_dim
  Vector mlp_b1;  // hidden
  Matrix mlp_w2;  // model_dim x hidden
  Vector mlp_b2;  // model_dim
  Matrix gamma_w;  // model_dim x model_dim
  Vector gamma_b;
  Matrix beta_w;
  Vector beta_b;
  Matrix w_q;  // model_dim x model_dim
  Matrix w_k;
  Matrix w_v;
  double ln_epsilon = kDefaultLnEpsilon;

  Eigen::Index pe_dim() const noexcept { return mlp_w1.cols(); }
  Eigen::Index hidden() const noexcept { return mlp_w1.rows(); }
  Eigen::Index model_dim() const noexcept { return mlp_w2.rows(); }

  static FtaParams zeros(const FtaDims& dims, double ln_epsilon = kDefaultLnEpsilon) {
    FtaParams p;
    const auto D = dims.model_dim;
    p.mlp_w1 = Matrix::Zero(dims.hidden, dims.pe_dim);
    p.mlp_b1 = Vector::Zero(dims.hidden);
    p.mlp_w2 = Matrix::Zero(D, dims.hidden);
    p.mlp_b2 = Vector::Zero(D);
    p.gamma_w = Matrix::Zero(D, D);
    p.gamma_b = Vector::Zero(D);
    p.beta_w = Matrix::Zero(D, D);
    p.beta_b = Vector::Zero(D);
    p.w_q = Matrix::Zero(D, D);
    p.w_k = Matrix::Zero(D, D);
    p.w_v = Matrix::Zero(D, D);
    p.ln_epsilon = ln_epsilon;
    return p;
  }

  /// Calls fn(name, tensor) on every tensor in a fixed order. Vectors are
  /// passed as n x 1 matrices.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    visit(*this, fn);
  }
  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    visit(*this, fn);
  }

  void validate() const {
    const auto P = pe_dim();
    const auto H = hidden();
    const auto D = model_dim();
    require(P >= 2 && P % 2 == 0, "FtaParams: pe_dim must be even and positive");
    require(H >= 1 && D >= 1, "FtaParams: hidden and model_dim must be positive");
    require(mlp_b1.size() == H && mlp_w2.cols() == H && mlp_b2.size() == D, "FtaParams: MLP shapes inconsistent");
    auto square = [D](const Matrix& m) { return m.rows() == D && m.cols() == D; };
    require(square(gamma_w) && square(beta_w) && gamma_b.size() == D && beta_b.size() == D,
            "FtaParams: modulation shapes inconsistent");
    require(square(w_q) && square(w_k) && square(w_v), "FtaParams: projection shapes inconsistent");
    require(ln_epsilon >= 0.0 && std::isfinite(ln_epsilon), "FtaParams: ln_epsilon must be >= 0");
    bool finite = true;
    for_each_tensor([&](const std::string&, const auto& m) { finite = finite && m.allFinite(); });
    require(finite, "FtaParams: non-finite weights");
  }

 private:
  template <typename Self, typename Fn>
  static void visit(Self& s, Fn& fn) {
    fn(std::string("mlp_w1"), s.mlp_w1);
    fn(std::string("mlp_b1"), s.mlp_b1);
    fn(std::string("mlp_w2"), s.mlp_w2);
    fn(std::string("mlp_b2"), s.mlp_b2);
    fn(std::string("gamma_w"), s.gamma_w);
    fn(std::string("gamma_b"), s.gamma_b);
    fn(std::string("beta_w"), s.beta_w);
    fn(std::string("beta_b"), s.beta_b);
    fn(std::string("w_q"), s.w_q);
    fn(std::string("w_k"), s.w_k);
    fn(std::string("w_v"), s.w_v);
  }
};

enum class FtaInit {
  /// N(0, 0.02^2) everywhere except zero modulation projections: the block
  /// starts as plain LayerNorm + attention.
  adaln_zero,
  /// N(0, 1/fan_in) weights and N(0, 0.1^2) biases on every tensor,
  /// modulation included. Used for gradient checks, where all paths must be live.
  dense,
};

inline FtaParams random_params(const FtaDims& dims, RngSeed seed, FtaInit init = FtaInit::adaln_zero,
                               double ln_epsilon = kDefaultLnEpsilon) {
  require(dims.pe_dim >= 2 && dims.pe_dim % 2 == 0, "random_params: pe_dim must be even and positive");
  require(dims.hidden >= 1 && dims.model_dim >= 1, "random_params: dims must be positive");
  FtaParams p = FtaParams::zeros(dims, ln_epsilon);
  std::uint64_t index = 0;
  p.for_each_tensor([&](const std::string& name, auto& m) {
    auto gen = seed.stream(index++).engine();
    const bool modulation = name.rfind("gamma_", 0) == 0 || name.rfind("beta_", 0) == 0;
    const bool bias = m.cols() == 1 && name.find("_b") != std::string::npos;
    double scale = 0.02;
    if (init == FtaInit::adaln_zero && modulation) return;
    if (init == FtaInit::dense) scale = bias ? 0.1 : 1.0 / std::sqrt(static_cast<double>(m.cols()));
    m = scale * standard_normal(m.rows(), m.cols(), gen);
  });
  return p;
}

/// Entry 2i = sin(t / 10000^(2i/pe_dim)), entry 2i+1 = cos of the same angle.
inline Vector sinusoidal_pe(std::size_t t, Eigen::Index pe_dim) {
  require(pe_dim >= 2 && pe_dim % 2 == 0, "sinusoidal_pe: pe_dim must be even and positive");
  Vector pe(pe_dim);
  for (Eigen::Index i = 0; i < pe_dim / 2; ++i) {
    const double angle =
        static_cast<double>(t) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(pe_dim));
    pe[2 * i] = std::sin(angle);
    pe[2 * i + 1] = std::cos(angle);
  }
  return pe;
}

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

}  // namespace detail

inline Vector timestep_embed(const FtaParams& params, std::size_t t) {
  params.validate();
  const Vector h = params.mlp_w1 * sinusoidal_pe(t, params.pe_dim()) + params.mlp_b1;
  return params.mlp_w2 * h.unaryExpr(&detail::silu) + params.mlp_b2;
}

/// Per-frame normalization over the feature axis, no affine part.
/// With ln_epsilon = 0 a constant row divides zero by zero.
inline Matrix layer_norm(const FeatureSequence& X, double ln_epsilon) {
  const Vector mean = X.rowwise().mean();
  const Matrix centered = X.colwise() - mean;
  const Vector var = centered.array().square().rowwise().mean();
  const Vector inv_std = (var.array() + ln_epsilon).rsqrt();
  return centered.array().colwise() * inv_std.array();
}

/// LayerNorm(X) (1 + gamma(e_t)) + beta(e_t), modulation broadcast over frames.
inline FeatureSequence ada_layer_norm(const FeatureSequence& X, const Vector& e_t, const FtaParams& params) {
  params.validate();
  require(X.cols() == params.model_dim() && e_t.size() == params.model_dim(), "ada_layer_norm: dim mismatch");
  const Vector scale = (params.gamma_w * e_t + params.gamma_b).array() + 1.0;
  const Vector shift = params.beta_w * e_t + params.beta_b;
  Matrix out = layer_norm(X, params.ln_epsilon).array().rowwise() * scale.transpose().array();
  out.rowwise() += shift.transpose();
  return out;
}

/// Every intermediate of one forward pass, kept for the backward pass.
struct FtaForward {
  Vector pe, h1, act, e, gamma, beta;
  Matrix xhat;     // normalized input
  Vector inv_std;  // per frame
  Matrix x_mod;    // modulated input
  Matrix q, k, v;
  Matrix attn;  // row-stochastic, frames x frames
  Matrix out;   // X + attn v
};

inline FtaForward fta_forward_cached(const FtaParams& params, const FeatureSequence& X, std::size_t t) {
  params.validate();
  require(X.rows() >= 1 && X.cols() == params.model_dim(), "fta_forward: X must be frames x model_dim");
  require(X.allFinite(), "fta_forward: non-finite input");

  FtaForward f;
  f.pe = sinusoidal_pe(t, params.pe_dim());
  f.h1 = params.mlp_w1 * f.pe + params.mlp_b1;
  f.act = f.h1.unaryExpr(&detail::silu);
  f.e = params.mlp_w2 * f.act + params.mlp_b2;
  f.gamma = params.gamma_w * f.e + params.gamma_b;
  f.beta = params.beta_w * f.e + params.beta_b;

  const Vector mean = X.rowwise().mean();
  const Matrix centered = X.colwise() - mean;
  f.inv_std = (centered.array().square().rowwise().mean() + params.ln_epsilon).rsqrt();
  f.xhat = centered.array().colwise() * f.inv_std.array();
  f.x_mod = f.xhat.array().rowwise() * (f.gamma.array() + 1.0).transpose();
  f.x_mod.rowwise() += f.beta.transpose();
  if (!f.x_mod.allFinite()) throw NumericalError("fta_forward: non-finite modulated input (degenerate LayerNorm row?)");

  f.q = f.x_mod * params.w_q;
  f.k = f.x_mod * params.w_k;
  f.v = f.x_mod * params.w_v;
  Matrix scores = f.q * f.k.transpose() / std::sqrt(static_cast<double>(params.model_dim()));
  scores.colwise() -= scores.rowwise().maxCoeff();
  f.attn = scores.array().exp();
  f.attn.array().colwise() /= f.attn.rowwise().sum().array();
  f.out = X + f.attn * f.v;
  if (!f.out.allFinite()) throw NumericalError("fta_forward: non-finite output");
  return f;
}

/// X + softmax(Q K^T / sqrt(d)) V with Q, K, V projected from the modulated input.
inline FeatureSequence fta_forward(const FtaParams& params, const FeatureSequence& X, std::size_t t) {
  return fta_forward_cached(params, X, t).out;
}

/// Parameter gradients (same layout as the parameters) and input gradient.
struct FtaGradients {
  FtaParams params;
  Matrix x;
};

/// Backward pass of fta_forward for an upstream gradient d_out.
inline FtaGradients fta_backward(const FtaParams& params, const FtaForward& f, const Matrix& d_out) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(params.model_dim()));
  FtaGradients g;
  g.params.ln_epsilon = params.ln_epsilon;

  // out = X + A V
  const Matrix d_attn = d_out * f.v.transpose();
  const Matrix d_v = f.attn.transpose() * d_out;
  // softmax rows: dS = A * (dA - rowsum(dA * A))
  const Vector row_dot = (d_attn.array() * f.attn.array()).rowwise().sum();
  const Matrix d_scores = (f.attn.array() * (d_attn.colwise() - row_dot).array()).matrix() * inv_sqrt_d;
  const Matrix d_q = d_scores * f.k;
  const Matrix d_k = d_scores.transpose() * f.q;

  g.params.w_q = f.x_mod.transpose() * d_q;
  g.params.w_k = f.x_mod.transpose() * d_k;
  g.params.w_v = f.x_mod.transpose() * d_v;
  const Matrix d_xmod = d_q * params.w_q.transpose() + d_k * params.w_k.transpose() + d_v * params.w_v.transpose();

  // x_mod = xhat (1 + gamma) + beta
  const Vector d_gamma = (d_xmod.array() * f.xhat.array()).colwise().sum().transpose();
  const Vector d_beta = d_xmod.colwise().sum().transpose();
  const Matrix d_xhat = d_xmod.array().rowwise() * (f.gamma.array() + 1.0).transpose();

  // LayerNorm: dx = inv_std (dxhat - mean(dxhat) - xhat mean(dxhat * xhat))
  const Vector mean_d = d_xhat.rowwise().mean();
  const Vector mean_dx = (d_xhat.array() * f.xhat.array()).rowwise().mean();
  Matrix d_ln = d_xhat.colwise() - mean_d;
  d_ln -= (f.xhat.array().colwise() * mean_dx.array()).matrix();
  d_ln = d_ln.array().colwise() * f.inv_std.array();
  g.x = d_out + d_ln;

  g.params.gamma_w = d_gamma * f.e.transpose();
  g.params.gamma_b = d_gamma;
  g.params.beta_w = d_beta * f.e.transpose();
  g.params.beta_b = d_beta;
  const Vector d_e = params.gamma_w.transpose() * d_gamma + params.beta_w.transpose() * d_beta;

  g.params.mlp_w2 = d_e * f.act.transpose();
  g.params.mlp_b2 = d_e;
  const Vector d_h1 = (params.mlp_w2.transpose() * d_e).array() * f.h1.unaryExpr(&detail::silu_grad).array();
  g.params.mlp_w1 = d_h1 * f.pe.transpose();
  g.params.mlp_b1 = d_h1;
  return g;
}

/// L = 1/2 ||fta_forward(params, X, t)||^2.
inline double fta_half_sq_loss(const FtaParams& params, const FeatureSequence& X, std::size_t t) {
  return 0.5 * fta_forward(params, X, t).squaredNorm();
}

/// Analytic gradients of fta_half_sq_loss.
inline FtaGradients fta_loss_gradients(const FtaParams& params, const FeatureSequence& X, std::size_t t) {
  const FtaForward f = fta_forward_cached(params, X, t);
  return fta_backward(params, f, f.out);
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_tensor;
  Eigen::Index worst_index = 0;
};

inline constexpr std::size_t kGradCheckMinCoordinates = 200;

/// Compares analytic gradients of 1/2 ||FTA(X, t)||^2 against central finite
/// differences on a seeded subsample of coordinates drawn from every tensor
/// (and X). Relative error per coordinate is
/// |g_a - g_fd| / max(|g_a|, |g_fd|, 1e-8).
inline GradCheckReport fta_grad_check(const FtaParams& params, const FeatureSequence& X, std::size_t t, double h,
                                      RngSeed seed) {
  require(h >= 1e-7 && h <= 1e-3, "fta_grad_check: h must lie in [1e-7, 1e-3]");
  const FtaGradients analytic = fta_loss_gradients(params, X, t);

  FtaParams probe = params;
  Matrix x_probe = X;
  struct Target {
    std::string name;
    double* value;
    const double* grad;
    Eigen::Index size;
  };
  std::vector<Target> targets;
  {
    std::vector<std::pair<std::string, double*>> values;
    probe.for_each_tensor([&](const std::string& name, auto& m) { values.emplace_back(name, m.data()); });
    std::vector<std::pair<const double*, Eigen::Index>> grads;
    analytic.params.for_each_tensor([&](const std::string&, const auto& m) { grads.emplace_back(m.data(), m.size()); });
    for (std::size_t i = 0; i < values.size(); ++i)
      targets.push_back({values[i].first, values[i].second, grads[i].first, grads[i].second});
    targets.push_back({"x", x_probe.data(), analytic.x.data(), x_probe.size()});
  }

  // Per-tensor quota, raised until the total reaches the minimum or covers everything.
  std::size_t quota = 24;
  auto total_for = [&](std::size_t q) {
    std::size_t n = 0;
    for (const auto& tg : targets) n += std::min<std::size_t>(q, static_cast<std::size_t>(tg.size));
    return n;
  };
  std::size_t everything = 0;
  for (const auto& tg : targets) everything += static_cast<std::size_t>(tg.size);
  while (total_for(quota) < std::min(kGradCheckMinCoordinates, everything)) ++quota;

  GradCheckReport report;
  for (std::size_t ti = 0; ti < targets.size(); ++ti) {
    auto& tg = targets[ti];
    std::vector<Eigen::Index> order(static_cast<std::size_t>(tg.size));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto gen = seed.stream(ti).engine();
    const std::size_t take = std::min<std::size_t>(quota, order.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(gen)]);
    }
    for (std::size_t i = 0; i < take; ++i) {
      const Eigen::Index idx = order[i];
      const double saved = tg.value[idx];
      tg.value[idx] = saved + h;
      const double up = fta_half_sq_loss(probe, x_probe, t);
      tg.value[idx] = saved - h;
      const double down = fta_half_sq_loss(probe, x_probe, t);
      tg.value[idx] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double ga = tg.grad[idx];
      const double rel = std::abs(ga - fd) / std::max({std::abs(ga), std::abs(fd), 1e-8});
      ++report.coordinates;
      if (rel > report.max_rel_error || report.coordinates == 1) {
        report.max_rel_error = rel;
        report.worst_tensor = tg.name;
        report.worst_index = idx;
      }
    }
  }
  return report;
}

/// Row-normalized timestep x frequency-bin map of block outputs.
struct FrequencyHeatmap {
  Matrix rows;  // n_timesteps x n_bins
  std::vector<std::size_t> timesteps;
};

/// Per timestep: DCT over time, |coeff| averaged over feature dims, log1p,
/// mean over contiguous near-equal bins, divide by the row sum. An all-zero
/// row becomes uniform.
inline FrequencyHeatmap frequency_heatmap(std::span<const std::pair<std::size_t, FeatureSequence>> outputs,
                                          Eigen::Index n_bins) {
  require(!outputs.empty(), "frequency_heatmap: no outputs");
  const Eigen::Index frames = outputs.front().second.rows();
  const Eigen::Index dims = outputs.front().second.cols();
  require(frames >= 1 && dims >= 1, "frequency_heatmap: empty sequence");
  const auto edges = contiguous_bins(frames, n_bins);
  const DctPlan plan(frames);

  FrequencyHeatmap map;
  map.rows = Matrix::Zero(static_cast<Eigen::Index>(outputs.size()), n_bins);
  for (std::size_t r = 0; r < outputs.size(); ++r) {
    const auto& [t, seq] = outputs[r];
    require(seq.rows() == frames && seq.cols() == dims, "frequency_heatmap: shape mismatch");
    require(seq.allFinite(), "frequency_heatmap: non-finite output");
    map.timesteps.push_back(t);
    const Vector magnitude = plan.forward(seq).cwiseAbs().rowwise().mean().array().log1p().matrix();
    auto row = map.rows.row(static_cast<Eigen::Index>(r));
    for (Eigen::Index b = 0; b < n_bins; ++b) {
      const auto lo = edges[static_cast<std::size_t>(b)];
      const auto hi = edges[static_cast<std::size_t>(b) + 1];
      row[b] = magnitude.segment(lo, hi - lo).mean();
    }
    const double total = row.sum();
    if (total > 0.0)
      row /= total;
    else
      row.setConstant(1.0 / static_cast<double>(n_bins));
  }
  return map;
}

}  // namespace freqdiff
