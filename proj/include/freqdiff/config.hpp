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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "freqdiff/common.hpp"
#include "freqdiff/fta.hpp"
#include "freqdiff/objective.hpp"
#include "freqdiff/schedule.hpp"

namespace freqdiff {

using json = nlohmann::json;

struct ScheduleConfig {
  std::size_t steps = 1000;
  double beta_start = kDefaultBetaStart;
  double beta_end = kDefaultBetaEnd;

  NoiseSchedule build() const { return linear_beta(steps, beta_start, beta_end); }
};

struct GConfig {
  std::string model = "constant";
  double c = 1.0;

  GProfile build(std::size_t steps) const {
    require(model == "constant", "g.model: only \"constant\" is supported");
    return constant_g(steps, c);
  }
};

struct FtaConfig {
  Eigen::Index pe_dim = 64;
  Eigen::Index hidden = 128;
  Eigen::Index model_dim = 16;
  Eigen::Index frames = 8;
  double ln_epsilon = kDefaultLnEpsilon;

  FtaDims dims() const { return {pe_dim, hidden, model_dim}; }
};

struct FixtureConfig {
  Eigen::Index n_frames = 64;
  Eigen::Index n_dims = 1;
  double alpha = 2.0;
};

struct ExperimentConfig {
  Eigen::Index k_split = 8;
  double err_threshold = 0.3;
  std::size_t n_trials = 20;
  double corruption_scale = 1.0;
  std::size_t psd_step = 9;
  std::size_t n_samples = 100000;
};

struct RunConfig {
  ScheduleConfig schedule;
  GConfig g;
  LossWeights loss_weights;
  FtaConfig fta;
  FixtureConfig fixture;
  ExperimentConfig experiment;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::size_t threads = 1;
};

namespace detail {

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  require(j.is_object(), where + ": expected a JSON object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw InvalidArgument(where + ": unknown key \"" + key + "\"");
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidArgument(where + "." + key + ": " + e.what());
  }
}

}  // namespace detail

inline NoiseSchedule schedule_from_json(const json& j) {
  detail::reject_unknown(j, "schedule", {"T", "beta_start", "beta_end"});
  ScheduleConfig c;
  detail::read_opt(j, "T", c.steps, "schedule");
  detail::read_opt(j, "beta_start", c.beta_start, "schedule");
  detail::read_opt(j, "beta_end", c.beta_end, "schedule");
  return c.build();
}

inline LossWeights loss_weights_from_json(const json& j) {
  detail::reject_unknown(j, "loss_weights", {"lambda_dct", "lambda_simple", "lambda_lf", "lambda_s"});
  LossWeights w;
  detail::read_opt(j, "lambda_dct", w.lambda_dct, "loss_weights");
  detail::read_opt(j, "lambda_simple", w.lambda_simple, "loss_weights");
  detail::read_opt(j, "lambda_lf", w.lambda_lf, "loss_weights");
  detail::read_opt(j, "lambda_s", w.lambda_s, "loss_weights");
  w.validate();
  return w;
}

inline RunConfig run_config_from_json(const json& j) {
  detail::reject_unknown(j, "config",
                         {"schedule", "g", "loss_weights", "fta", "fixture", "experiment", "seed", "out", "threads"});
  RunConfig c;
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    detail::reject_unknown(s, "schedule", {"T", "beta_start", "beta_end"});
    detail::read_opt(s, "T", c.schedule.steps, "schedule");
    detail::read_opt(s, "beta_start", c.schedule.beta_start, "schedule");
    detail::read_opt(s, "beta_end", c.schedule.beta_end, "schedule");
  }
  if (j.contains("g")) {
    const auto& g = j.at("g");
    detail::reject_unknown(g, "g", {"model", "c"});
    detail::read_opt(g, "model", c.g.model, "g");
    detail::read_opt(g, "c", c.g.c, "g");
  }
  if (j.contains("loss_weights")) c.loss_weights = loss_weights_from_json(j.at("loss_weights"));
  if (j.contains("fta")) {
    const auto& f = j.at("fta");
    detail::reject_unknown(f, "fta", {"pe_dim", "hidden", "model_dim", "frames", "ln_epsilon"});
    detail::read_opt(f, "pe_dim", c.fta.pe_dim, "fta");
    detail::read_opt(f, "hidden", c.fta.hidden, "fta");
    detail::read_opt(f, "model_dim", c.fta.model_dim, "fta");
    detail::read_opt(f, "frames", c.fta.frames, "fta");
    detail::read_opt(f, "ln_epsilon", c.fta.ln_epsilon, "fta");
  }
  if (j.contains("fixture")) {
    const auto& f = j.at("fixture");
    detail::reject_unknown(f, "fixture", {"n_frames", "n_dims", "alpha"});
    detail::read_opt(f, "n_frames", c.fixture.n_frames, "fixture");
    detail::read_opt(f, "n_dims", c.fixture.n_dims, "fixture");
    detail::read_opt(f, "alpha", c.fixture.alpha, "fixture");
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    detail::reject_unknown(e, "experiment",
                           {"k_split", "err_threshold", "n_trials", "corruption_scale", "psd_step", "n_samples"});
    detail::read_opt(e, "k_split", c.experiment.k_split, "experiment");
    detail::read_opt(e, "err_threshold", c.experiment.err_threshold, "experiment");
    detail::read_opt(e, "n_trials", c.experiment.n_trials, "experiment");
    detail::read_opt(e, "corruption_scale", c.experiment.corruption_scale, "experiment");
    detail::read_opt(e, "psd_step", c.experiment.psd_step, "experiment");
    detail::read_opt(e, "n_samples", c.experiment.n_samples, "experiment");
  }
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    detail::read_opt(j, "seed", s, "config");
    c.seed = s;
  }
  detail::read_opt(j, "out", c.out, "config");
  detail::read_opt(j, "threads", c.threads, "config");

  c.schedule.build();
  c.g.build(c.schedule.steps);
  require(c.fta.pe_dim >= 2 && c.fta.pe_dim % 2 == 0, "fta.pe_dim must be even and positive");
  require(c.fta.hidden >= 1 && c.fta.model_dim >= 1 && c.fta.frames >= 1, "fta: dims must be positive");
  require(c.fta.ln_epsilon >= 0.0, "fta.ln_epsilon must be >= 0");
  require(c.fixture.n_frames >= 2 && c.fixture.n_dims >= 1 && c.fixture.alpha > 0.0, "fixture: invalid values");
  require(c.threads >= 1, "threads must be >= 1");
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("config '" + path.string() + "': " + e.what(), 0, 0);
  }
  return run_config_from_json(j);
}

/// Named tensors, row-major data with a shape header per tensor.
inline json fta_params_to_json(const FtaParams& params) {
  json tensors = json::object();
  params.for_each_tensor([&](const std::string& name, const auto& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    tensors[name] = {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
  });
  return {{"format", "freqdiff.fta_params"}, {"version", 1}, {"ln_epsilon", params.ln_epsilon}, {"tensors", tensors}};
}

inline FtaParams fta_params_from_json(const json& j) {
  require(j.is_object() && j.value("format", "") == "freqdiff.fta_params", "fta params: missing format tag");
  FtaParams p;
  p.ln_epsilon = j.at("ln_epsilon").get<double>();
  const auto& tensors = j.at("tensors");
  p.for_each_tensor([&](const std::string& name, auto& m) {
    if (!tensors.contains(name)) throw InvalidArgument("fta params: missing tensor \"" + name + "\"");
    const auto& t = tensors.at(name);
    const auto rows = t.at("shape").at(0).get<Eigen::Index>();
    const auto cols = t.at("shape").at(1).get<Eigen::Index>();
    const auto& data = t.at("data");
    require(rows >= 0 && cols >= 0 && data.size() == static_cast<std::size_t>(rows * cols),
            "fta params: tensor \"" + name + "\" data does not match its shape");
    require(m.ColsAtCompileTime != 1 || cols == 1, "fta params: tensor \"" + name + "\" must be a column");
    m.resize(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data.at(i++).get<double>();
  });
  p.validate();
  return p;
}

}  // namespace freqdiff
