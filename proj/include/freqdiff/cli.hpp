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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "freqdiff/config.hpp"
#include "freqdiff/diffusion.hpp"
#include "freqdiff/fta.hpp"
#include "freqdiff/metrics.hpp"
#include "freqdiff/objective.hpp"
#include "freqdiff/signalio.hpp"
#include "freqdiff/spectral.hpp"
#include "freqdiff/transform.hpp"

namespace freqdiff::cli {

/// Exit codes: success / contract held, contract failed, usage or input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitContractFailed = 1;
inline constexpr int kExitUsage = 2;

/// Thrown for conditions that map to the usage exit code.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

inline std::string sci(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << std::scientific << v;
  return s.str();
}

inline std::filesystem::path prepare_out(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

inline RngSeed require_seed(const RunConfig& config) {
  if (!config.seed) throw UsageError("this command needs --seed or a \"seed\" entry in the config");
  return RngSeed(*config.seed);
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------- analyze

inline int cmd_analyze(const RunConfig& config, const std::string& input, bool header, Eigen::Index n_bands,
                       Streams io) {
  const MotionSequence motion = load_motion_csv(input, header);
  const SpectrumReport report = spectrum_report(motion, n_bands);
  const auto out = prepare_out(config.out);

  Column k{"k", {}};
  for (Eigen::Index i = 0; i < report.energy.size(); ++i) k.values.push_back(static_cast<double>(i));
  save_table(out / "spectrum_energy.csv", Table{k, {"energy", to_std(report.energy)}});

  Table bands{{"band", {}}, {"k_begin", {}}, {"k_end", {}}, {"fraction", {}}, {"zero_energy", {}}};
  for (Eigen::Index b = 0; b < n_bands; ++b) {
    bands[0].values.push_back(static_cast<double>(b));
    bands[1].values.push_back(static_cast<double>(report.edges[static_cast<std::size_t>(b)]));
    bands[2].values.push_back(static_cast<double>(report.edges[static_cast<std::size_t>(b) + 1]));
    bands[3].values.push_back(report.fractions[b]);
    bands[4].values.push_back(report.zero_energy ? 1.0 : 0.0);
  }
  save_table(out / "spectrum_bands.csv", bands);

  io.out << "analyze: " << motion.frames() << " frames x " << motion.dims() << " dims, " << n_bands << " bands\n";
  if (report.zero_energy)
    io.out << "analyze: zero-energy motion, band fractions undefined\n";
  else
    io.out << "analyze: band 0 fraction " << report.fractions[0] << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

inline int simulate_psd(const RunConfig& config, RngSeed seed, const std::filesystem::path& out, Streams io) {
  const auto& ex = config.experiment;
  const MotionSequence x0 = gen_powerlaw_motion(config.fixture.n_frames, 1, config.fixture.alpha, seed.stream(0));
  const GProfile profile = config.g.build(config.schedule.steps);
  const PsdCurve power0 = initial_power(x0);
  const PsdCurve theory = theoretical_psd(power0, profile, ex.psd_step);
  const PsdCurve estimate = estimate_psd_mc(x0, profile, ex.psd_step, ex.n_samples, seed.stream(1), config.threads);
  const CrossTermEstimate cross = cross_term_mc(x0, profile, ex.psd_step, ex.n_samples, seed.stream(2), config.threads);

  const Vector rel = ((estimate - theory).array().abs() / theory.array()).matrix();
  std::size_t cross_ok = 0;
  for (Eigen::Index k = 0; k < cross.mean.size(); ++k) cross_ok += std::abs(cross.mean[k]) <= 4.0 * cross.std_error[k];

  Column k{"k", {}};
  for (Eigen::Index i = 0; i < theory.size(); ++i) k.values.push_back(static_cast<double>(i));
  save_table(out / "psd.csv", Table{k,
                                    {"theoretical", to_std(theory)},
                                    {"estimated", to_std(estimate)},
                                    {"rel_error", to_std(rel)},
                                    {"cross_mean", to_std(cross.mean)},
                                    {"cross_std_error", to_std(cross.std_error)}});

  const bool held = rel.maxCoeff() < 0.05 && cross_ok == static_cast<std::size_t>(cross.mean.size());
  io.out << "psd: n=" << ex.n_samples << " step=" << ex.psd_step << " max_rel_error=" << sci(rel.maxCoeff())
         << " cross_within_4se=" << cross_ok << "/" << cross.mean.size() << " -> " << (held ? "held" : "FAILED")
         << "\n";
  return held ? kExitOk : kExitContractFailed;
}

inline int simulate_coarse_to_fine(const RunConfig& config, RngSeed seed, const std::filesystem::path& out,
                                   Streams io) {
  const auto& ex = config.experiment;
  const MotionSequence x0 =
      gen_powerlaw_motion(config.fixture.n_frames, config.fixture.n_dims, config.fixture.alpha, seed.stream(0));
  const auto result = coarse_to_fine_experiment(x0, config.schedule.build(), BandSplit{ex.k_split}, ex.err_threshold,
                                                ex.n_trials, seed.stream(1), config.threads);

  Table trace{{"t", {}}, {"band", {}}, {"error", {}}, {"trial", {}}};
  for (const auto& row : result.trace) {
    trace[0].values.push_back(static_cast<double>(row.t));
    trace[1].values.push_back(static_cast<double>(static_cast<int>(row.band)));
    trace[2].values.push_back(row.error);
    trace[3].values.push_back(static_cast<double>(row.trial));
  }
  save_table(out / "coarse_to_fine_trace.csv", trace);

  Table crossings{{"trial", {}}, {"low_crossing", {}}, {"high_crossing", {}}};
  for (std::size_t i = 0; i < result.low_crossing.size(); ++i) {
    crossings[0].values.push_back(static_cast<double>(i));
    crossings[1].values.push_back(static_cast<double>(result.low_crossing[i]));
    crossings[2].values.push_back(static_cast<double>(result.high_crossing[i]));
  }
  save_table(out / "coarse_to_fine_crossings.csv", crossings);

  const bool held = result.trials_ordered() == ex.n_trials;
  io.out << "coarse_to_fine: mean low crossing " << result.mean_low << ", mean high crossing " << result.mean_high
         << ", ordered " << result.trials_ordered() << "/" << ex.n_trials << " -> " << (held ? "held" : "FAILED")
         << "\n";
  return held ? kExitOk : kExitContractFailed;
}

inline int simulate_dependency(const RunConfig& config, RngSeed seed, const std::filesystem::path& out, Streams io) {
  const auto& ex = config.experiment;
  const MotionSequence x0 =
      gen_powerlaw_motion(config.fixture.n_frames, config.fixture.n_dims, config.fixture.alpha, seed.stream(0));
  const auto result = dependency_experiment(x0, config.schedule.build(), BandSplit{ex.k_split}, ex.corruption_scale,
                                            ex.n_trials, seed.stream(1), config.threads);

  Table table{{"trial", {}}, {"clean_hf_error", {}}, {"corrupted_hf_error", {}}};
  for (std::size_t i = 0; i < result.clean_hf_error.size(); ++i) {
    table[0].values.push_back(static_cast<double>(i));
    table[1].values.push_back(result.clean_hf_error[i]);
    table[2].values.push_back(result.corrupted_hf_error[i]);
  }
  save_table(out / "dependency.csv", table);

  const bool held = ex.corruption_scale > 0.0 ? result.mean_corrupted > result.mean_clean
                                              : result.mean_corrupted == result.mean_clean;
  io.out << "dependency: corruption_scale " << ex.corruption_scale << ", mean HF error clean " << result.mean_clean
         << " corrupted " << result.mean_corrupted << " -> " << (held ? "held" : "FAILED") << "\n";
  return held ? kExitOk : kExitContractFailed;
}

inline int cmd_simulate(const RunConfig& config, const std::string& experiment, Streams io) {
  const RngSeed seed = require_seed(config);
  const auto out = prepare_out(config.out);
  if (experiment == "psd") return simulate_psd(config, seed, out, io);
  if (experiment == "coarse_to_fine") return simulate_coarse_to_fine(config, seed, out, io);
  if (experiment == "dependency") return simulate_dependency(config, seed, out, io);
  throw UsageError("unknown experiment '" + experiment + "' (expected coarse_to_fine, dependency or psd)");
}

// ---------------------------------------------------------------- verify

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string note;
};

namespace suites {

inline SuiteResult dct_orthonormality() {
  double worst = 0.0;
  for (Eigen::Index N : {1, 2, 17, 64, 196, 256}) {
    const Matrix G = dct_matrix(N);
    worst = std::max(worst, (G.transpose() * G - Matrix::Identity(N, N)).cwiseAbs().maxCoeff());
  }
  return {"dct_orthonormality", worst < 1e-10, worst, 1e-10, "N in {1,2,17,64,196,256}"};
}

inline SuiteResult dct_roundtrip(RngSeed seed) {
  auto gen = seed.engine();
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vector x(196);
    for (auto& v : x) v = u(gen);
    worst = std::max(worst, (idct(dct2(x)) - x).cwiseAbs().maxCoeff());
  }
  return {"dct_roundtrip", worst < 1e-9, worst, 1e-9, "100 signals, N=196"};
}

inline SuiteResult parseval(RngSeed seed) {
  auto gen = seed.engine();
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vector x(1 + i % 97);
    for (auto& v : x) v = n(gen);
    worst = std::max(worst, std::abs(x.squaredNorm() - dct2(x).squaredNorm()) / x.squaredNorm());
  }
  return {"parseval", worst < 1e-10, worst, 1e-10, "100 signals"};
}

inline SuiteResult layernorm(const RunConfig& config, RngSeed seed) {
  const auto D = config.fta.model_dim;
  FtaParams params = random_params(config.fta.dims(), seed, FtaInit::dense, config.fta.ln_epsilon);
  const Vector e = timestep_embed(params, 500);
  const Vector shift = params.beta_w * e + params.beta_b;
  auto gen = seed.stream(99).engine();
  Matrix X = standard_normal(4, D, gen);
  X.row(3).setConstant(0.75);  // degenerate row

  const Matrix ln = layer_norm(X, params.ln_epsilon);
  const Matrix mod = ada_layer_norm(X, e, params);
  double worst = 0.0;
  if (!ln.allFinite() || !mod.allFinite()) {
    return {"layernorm", false, std::numeric_limits<double>::infinity(), 1e-9,
            "degenerate row is not finite (ln_epsilon=" + sci(params.ln_epsilon) + ")"};
  }
  for (Eigen::Index r = 0; r < 3; ++r) {
    const double mean = ln.row(r).mean();
    const double var = (ln.row(r).array() - mean).square().mean();
    const Eigen::RowVectorXd c = X.row(r).array() - X.row(r).mean();
    const double raw = c.squaredNorm() / static_cast<double>(D);
    worst = std::max({worst, std::abs(mean), std::abs(var * (raw + params.ln_epsilon) / raw - 1.0)});
  }
  worst = std::max(worst, (mod.row(3).transpose() - shift).cwiseAbs().maxCoeff());
  return {"layernorm", worst < 1e-9, worst, 1e-9, "row statistics and constant-row output"};
}

inline SuiteResult fta_residual(const RunConfig& config, RngSeed seed) {
  FtaParams params = random_params(config.fta.dims(), seed, FtaInit::dense, config.fta.ln_epsilon);
  params.w_v.setZero();
  auto gen = seed.stream(7).engine();
  const Matrix X = standard_normal(config.fta.frames, config.fta.model_dim, gen);
  double worst = 0.0;
  double row_sum_err = 0.0;
  try {
    for (std::size_t t : {std::size_t{0}, std::size_t{250}, config.schedule.steps - 1}) {
      const FtaForward f = fta_forward_cached(params, X, t);
      worst = std::max(worst, (f.out - X).cwiseAbs().maxCoeff());
      row_sum_err = std::max(row_sum_err, (f.attn.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
  } catch (const Error& e) {
    return {"fta_residual", false, std::numeric_limits<double>::infinity(), 0.0, e.what()};
  }
  return {"fta_residual", worst == 0.0 && row_sum_err < 1e-12, std::max(worst, row_sum_err), 1e-12,
          "W_v=0 identity exact, attention rows sum to 1"};
}

inline SuiteResult fta_gradcheck(const RunConfig& config, RngSeed seed) {
  const FtaParams params = random_params(config.fta.dims(), seed, FtaInit::dense, config.fta.ln_epsilon);
  auto gen = seed.stream(11).engine();
  const Matrix X = standard_normal(config.fta.frames, config.fta.model_dim, gen);
  try {
    const auto report = fta_grad_check(params, X, 321 % config.schedule.steps, 1e-5, seed.stream(12));
    return {"fta_gradcheck", report.max_rel_error < 1e-4 && report.coordinates >= kGradCheckMinCoordinates,
            report.max_rel_error, 1e-4,
            std::to_string(report.coordinates) + " coordinates, worst in " + report.worst_tensor};
  } catch (const Error& e) {
    return {"fta_gradcheck", false, std::numeric_limits<double>::infinity(), 1e-4, e.what()};
  }
}

inline SuiteResult loss_identities(const RunConfig& config, RngSeed seed) {
  auto gen = seed.engine();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Index T = 4 + i % 29;
    const Eigen::Index D = 1 + i % 5;
    const MotionSequence pred(standard_normal(T, D, gen));
    const MotionSequence target(standard_normal(T, D, gen));
    const FrameMask full = FrameMask::full(static_cast<std::size_t>(T));
    const double mse = masked_mse(pred, target, full);
    worst = std::max(worst, std::abs(masked_dct_loss(dct_batch(pred), target, full) - mse) / mse);
    worst = std::max(worst, std::abs(lowfreq_loss(pred, target, full, T) - mse) / mse);
  }
  bool exact = total_loss(1.0, 0.5, LossWeights{}) == 1.1;
  for (std::size_t t = 0; t < config.schedule.steps; ++t) {
    const std::size_t split = default_t_split(config.schedule.steps);
    exact = exact && timestep_gate(t, split, Stage::early) + timestep_gate(t, split, Stage::late) == 1;
  }
  return {"loss_identities", exact && worst < 1e-9, worst, 1e-9, "Parseval loss identity, full-band LF, gates"};
}

inline SuiteResult fid_closed_form(RngSeed seed) {
  auto gen = seed.engine();
  std::uniform_real_distribution<double> mu(-5.0, 5.0);
  std::uniform_real_distribution<double> sd(0.1, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double m1 = mu(gen), m2 = mu(gen), s1 = sd(gen), s2 = sd(gen);
    const GaussianStats a{Vector::Constant(1, m1), Matrix::Constant(1, 1, s1 * s1)};
    const GaussianStats b{Vector::Constant(1, m2), Matrix::Constant(1, 1, s2 * s2)};
    const double closed = (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2);
    worst = std::max(worst, std::abs(fid(a, b) - closed));
  }
  const Matrix B = standard_normal(6, 6, gen);
  const Matrix m = B * B.transpose();
  const Matrix r = sqrtm_psd(m);
  const double recon = (r * r - m).norm() / m.norm();
  const GaussianStats s = gaussian_stats(standard_normal(50, 6, gen));
  const double self = fid(s, s);
  return {"fid_closed_form", worst < 1e-10 && recon < 1e-8 && self < 1e-9, std::max({worst, recon, self}), 1e-10,
          "1000 one-dimensional instances, sqrtm reconstruction, fid(a,a)"};
}

}  // namespace suites

inline std::vector<SuiteResult> run_verify_suites(const RunConfig& config) {
  const RngSeed seed(config.seed.value_or(20260101));
  return {suites::dct_orthonormality(),
          suites::dct_roundtrip(seed.stream(1)),
          suites::parseval(seed.stream(2)),
          suites::layernorm(config, seed.stream(3)),
          suites::fta_residual(config, seed.stream(4)),
          suites::fta_gradcheck(config, seed.stream(5)),
          suites::loss_identities(config, seed.stream(6)),
          suites::fid_closed_form(seed.stream(7))};
}

inline int cmd_verify(const RunConfig& config, Streams io) {
  bool all = true;
  for (const auto& r : run_verify_suites(config)) {
    all = all && r.passed;
    io.out << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(20) << r.name << " max_error=" << sci(r.max_error)
           << " tol=" << sci(r.tolerance) << "  " << r.note << "\n";
  }
  io.out << (all ? "verify: all suites passed\n" : "verify: some suites FAILED\n");
  return all ? kExitOk : kExitContractFailed;
}

// ---------------------------------------------------------------- filter

inline int cmd_filter(const RunConfig& config, const std::string& input, bool header, Eigen::Index K, Streams io) {
  const MotionSequence motion = load_motion_csv(input, header);
  if (K < 0 || K > motion.frames())
    throw UsageError("K=" + std::to_string(K) + " out of range [0, " + std::to_string(motion.frames()) + "]");
  const auto out = prepare_out(config.out);
  save_motion_csv(out / "filtered.csv", filter_lowfreq(motion, K));
  io.out << "filter: kept " << K << " of " << motion.frames() << " coefficients -> " << (out / "filtered.csv").string()
         << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- metrics

inline int cmd_metrics(const RunConfig& config, const std::string& a_path, const std::string& b_path, bool header,
                       int pairs, Streams io) {
  const RngSeed seed = require_seed(config);
  const Matrix a = load_motion_csv(a_path, header).data();
  const Matrix b = load_motion_csv(b_path, header).data();
  if (a.cols() != b.cols())
    throw UsageError("feature dimension mismatch: " + std::to_string(a.cols()) + " vs " + std::to_string(b.cols()));
  if (a.rows() < 2 || b.rows() < 2) throw UsageError("each feature set needs at least 2 rows");
  const double distance = fid(gaussian_stats(a), gaussian_stats(b));
  const double div_a = diversity(a, pairs, seed.stream(0));
  const double div_b = diversity(b, pairs, seed.stream(1));
  const auto out = prepare_out(config.out);
  const json result = {{"fid", distance}, {"diversity_a", div_a}, {"diversity_b", div_b}, {"pairs", pairs}};
  std::ofstream f(out / "metrics.json", std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write metrics.json");
  f << result.dump(2) << "\n";
  io.out << "metrics: fid " << distance << ", diversity_a " << div_a << ", diversity_b " << div_b << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- generate

inline int cmd_generate(const RunConfig& config, Streams io) {
  const RngSeed seed = require_seed(config);
  const auto& fx = config.fixture;
  const auto out = prepare_out(config.out);
  save_motion_csv(out / "powerlaw.csv", gen_powerlaw_motion(fx.n_frames, fx.n_dims, fx.alpha, seed));
  io.out << "generate: " << fx.n_frames << " x " << fx.n_dims << " power-law motion, alpha " << fx.alpha << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- entry

/// Parses arguments and dispatches a subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"freqdiff: frequency-domain diffusion analysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed for stochastic commands");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for Monte Carlo and trials")->check(CLI::PositiveNumber);

  std::string input, a_path, b_path, experiment;
  bool header = false;
  Eigen::Index bands = 4;
  Eigen::Index K = kDefaultLowFreqK;
  int pairs = kDefaultDiversityPairs;

  auto* analyze = app.add_subcommand("analyze", "banded DCT energy report of a motion CSV");
  analyze->add_option("--input,input", input, "motion CSV")->required();
  analyze->add_flag("--header", header, "first line is a header");
  analyze->add_option("--bands", bands, "number of contiguous frequency bands")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "run a spectral or reverse-diffusion experiment");
  simulate->add_option("--experiment,experiment", experiment, "coarse_to_fine | dependency | psd")
      ->required()
      ->check(CLI::IsMember({"coarse_to_fine", "dependency", "psd"}));

  auto* verify = app.add_subcommand("verify", "run the invariant suites");

  auto* filter = app.add_subcommand("filter", "keep the first K DCT coefficients of every dimension");
  filter->add_option("--input,input", input, "motion CSV")->required();
  filter->add_flag("--header", header, "first line is a header");
  filter->add_option("-k,--k", K, "coefficients to keep")->required();

  auto* metrics = app.add_subcommand("metrics", "FID and Diversity of two feature CSVs");
  metrics->add_option("--a", a_path, "feature set A (rows = items)")->required();
  metrics->add_option("--b", b_path, "feature set B (rows = items)")->required();
  metrics->add_flag("--header", header, "first line is a header");
  metrics->add_option("--pairs,-S", pairs, "sampled pairs for Diversity")->check(CLI::PositiveNumber);

  auto* generate = app.add_subcommand("generate", "write a synthetic power-law motion CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  const Streams io{out, err};
  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) config.seed = seed;
    if (out_dir) config.out = *out_dir;
    if (threads) config.threads = *threads;

    if (*analyze) return cmd_analyze(config, input, header, bands, io);
    if (*simulate) return cmd_simulate(config, experiment, io);
    if (*verify) return cmd_verify(config, io);
    if (*filter) return cmd_filter(config, input, header, K, io);
    if (*metrics) return cmd_metrics(config, a_path, b_path, header, pairs, io);
    if (*generate) return cmd_generate(config, io);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace freqdiff::cli
