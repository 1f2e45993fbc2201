#pragma once

// Experiment plumbing: signal files, single-run reports, and the two scaling
// sweeps (time and samples against N at fixed R, and against R at fixed N).
//
// Timing covers the recovery algorithm only. Synthesizing oracle samples from
// the sparse ground truth costs O(R) per sample and is reported separately.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "smfft/errors.hpp"
#include "smfft/md_transform.hpp"
#include "smfft/signal.hpp"
#include "smfft/support_recovery.hpp"

namespace smfft {

enum class OutputFormat { csv, json };

struct RunConfig {
  std::string command = "transform";
  std::optional<std::string> signal_path;
  SupportParams params = table3_params();
  int dims = 3;
  Index axis_size = 128;
  std::uint64_t seed = 1;
  int trials = 20;
  std::optional<std::string> output;
  std::optional<OutputFormat> format;

  /// alpha = 0.15, delta = 0.1, p = 1e-4, eta = 1e-2, R = 50.
  static SupportParams table3_params() {
    SupportParams p;
    p.r_bound = 50;
    p.alpha = 0.15;
    p.delta = 0.1;
    p.p_fail = 1e-4;
    p.eta = 1e-2;
    return p;
  }
};

/// A signal to transform: ground-truth spectrum plus the noise on its samples.
struct SignalSpec {
  MdSpectrum spectrum;
  NoiseModel noise;
};

// ---------------------------------------------------------------------------
// Signal files
//
//   {"dims": 1, "axis_size": 40, "support": [[1], [23], [35]], "values": [1, 1, 1],
//    "noise": {"eta": 0.0, "seed": 7}}
//
// "noise" is optional; eta = 0 or absent means exact samples.

inline SignalSpec parse_signal(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("signal: top level must be an object");
    const int dims = doc.at("dims").get<int>();
    const auto axis = doc.at("axis_size").get<Index>();
    const auto& support = doc.at("support");
    const auto& values = doc.at("values");
    if (!support.is_array() || !values.is_array() || support.size() != values.size()) {
      throw ParseError("signal: 'support' and 'values' must be arrays of equal length");
    }
    SignalSpec spec;
    spec.spectrum.lattice = RankOneLattice::make(dims, axis);
    for (std::size_t i = 0; i < support.size(); ++i) {
      MultiIndex j;
      if (support[i].is_array()) {
        j = support[i].get<MultiIndex>();
      } else {
        j = {support[i].get<Index>()};
      }
      if (spec.spectrum.entries.contains(j)) throw ParseError("signal: duplicate support index");
      const double v = values[i].get<double>();
      if (!(v > 0.0)) throw ParseError("signal: values must be positive");
      spec.spectrum.set(j, v);
    }
    if (doc.contains("noise")) {
      const auto& noise = doc.at("noise");
      const double eta = noise.value("eta", 0.0);
      if (eta < 0.0) throw ParseError("signal: noise eta must be nonnegative");
      if (eta > 0.0) {
        spec.noise = {eta, NoiseModel::Kind::gaussian, noise.value("seed", std::uint64_t{0})};
      }
    }
    return spec;
  } catch (const ParseError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("signal: ") + e.what());
  } catch (const Error& e) {
    throw ParseError(std::string("signal: ") + e.what());
  }
}

inline SignalSpec load_signal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open signal file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_signal(doc);
}

inline nlohmann::json spectrum_to_json(const MdSpectrum& s) {
  nlohmann::json support = nlohmann::json::array();
  nlohmann::json values = nlohmann::json::array();
  for (const auto& [j, v] : s.entries) {
    support.push_back(j);
    values.push_back(v);
  }
  return {{"dims", s.lattice.dims}, {"axis_size", s.lattice.axis_size}, {"support", support}, {"values", values}};
}

inline nlohmann::json signal_to_json(const SignalSpec& spec) {
  nlohmann::json doc = spectrum_to_json(spec.spectrum);
  if (spec.noise.kind == NoiseModel::Kind::gaussian) {
    doc["noise"] = {{"eta", spec.noise.eta}, {"seed", spec.noise.seed}};
  }
  return doc;
}

/// R random frequencies on [0, M)^d with amplitudes uniform in [0.5, 1.5].
inline SignalSpec random_signal(int dims, Index axis_size, Index r, double eta, std::uint64_t seed) {
  Rng rng(seed);
  SignalSpec spec;
  spec.spectrum = MdSpectrum::random(RankOneLattice::make(dims, axis_size), r, 0.5, 1.5, rng);
  if (eta > 0.0) spec.noise = {eta, NoiseModel::Kind::gaussian, seed ^ 0x5DEECE66Dull};
  return spec;
}

// ---------------------------------------------------------------------------
// Single runs

struct RunReport {
  MdSpectrum recovered;
  std::optional<double> rel_l2_error;
  std::size_t unique_samples = 0;
  std::size_t sample_requests = 0;
  double wall_time_ms = 0.0;
  double oracle_time_ms = 0.0;
  int ladder_steps = 0;
  int redraws_used = 0;
  std::uint64_t seed = 0;
};

/// Runs md_sfft on `signal` with an algorithm RNG seeded from `seed`.
inline RunReport run_recovery(const SignalSpec& signal, const SupportParams& params, std::uint64_t seed) {
  RunReport report;
  report.seed = seed;
  SampleLedger ledger;
  Sampler sampler = md_sample_adapter(signal.spectrum, signal.noise, &ledger);
  Rng rng(seed);
  const auto start = std::chrono::steady_clock::now();
  const MdRecovery rec = md_sfft(sampler, signal.spectrum.lattice, params, rng);
  const double total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  report.oracle_time_ms = sampler.oracle_seconds() * 1e3;
  report.wall_time_ms = std::max(0.0, total_ms - report.oracle_time_ms);
  report.recovered = rec.recovered;
  report.unique_samples = ledger.unique_count();
  report.sample_requests = ledger.total_requests();
  report.ladder_steps = static_cast<int>(rec.support.steps.size());
  report.redraws_used = rec.draws_used;
  return report;
}

/// Coefficients of `spectrum` recovered by a dense d-dimensional transform of
/// its tensor-grid samples; N must not exceed the oracle limit.
inline MdSpectrum dense_reference(const MdSpectrum& spectrum) {
  const DenseVector coeffs = dense_md_coefficients(dense_md_samples(spectrum), spectrum.lattice);
  MdSpectrum out{spectrum.lattice, {}};
  for (Index i = 0; i < coeffs.size(); ++i) {
    // Rounding noise from the dense transform is far below any amplitude.
    if (coeffs[i].real() > 1e-9) out.entries[unflatten_index(i, spectrum.lattice)] = coeffs[i].real();
  }
  return out;
}

/// JSON report; timing fields are omitted when `with_timing` is false so that
/// reports of identically seeded runs compare byte for byte.
inline nlohmann::json report_to_json(const RunReport& r, const SupportParams& params, bool with_timing = true) {
  nlohmann::json doc;
  doc["seed"] = r.seed;
  doc["params"] = {{"r_bound", params.r_bound}, {"alpha", params.alpha},     {"delta", params.delta},
                   {"rho", params.rho},         {"p", params.p_fail},        {"mu", params.mu},
                   {"delta_ratio", params.delta_ratio}, {"eta", params.eta}, {"bandwidth", base_bandwidth(params)}};
  doc["recovered"] = spectrum_to_json(r.recovered);
  doc["unique_samples"] = r.unique_samples;
  doc["sample_requests"] = r.sample_requests;
  doc["ladder_steps"] = r.ladder_steps;
  doc["redraws_used"] = r.redraws_used;
  if (r.rel_l2_error) doc["rel_l2_error"] = *r.rel_l2_error;
  if (with_timing) {
    doc["wall_time_ms"] = r.wall_time_ms;
    doc["oracle_time_ms"] = r.oracle_time_ms;
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Sweeps

struct TrialRow {
  Index n = 0;
  Index r = 0;
  int d = 0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  double time_ms = 0.0;
  std::size_t samples = 0;
  double rel_l2_error = 0.0;
  bool success = false;
  std::optional<double> dense_ms;  // dense transform baseline, small N only
};

/// Recovery counts as successful when the error is within 3 eta (1e-8 for exact samples).
inline double success_tolerance(double eta) { return eta > 0.0 ? 3.0 * eta : 1e-8; }

/// One seeded trial: random signal from `seed`, recovery, error against the ground truth.
inline TrialRow run_trial(int dims, Index axis_size, SupportParams params, std::uint64_t seed,
                          bool dense_baseline = false) {
  const SignalSpec signal = random_signal(dims, axis_size, params.r_bound, params.eta, seed);
  const RunReport report = run_recovery(signal, params, seed * 0x9E3779B97F4A7C15ull + 1);
  TrialRow row;
  row.n = signal.spectrum.lattice.total;
  row.r = params.r_bound;
  row.d = dims;
  row.eta = params.eta;
  row.seed = seed;
  row.time_ms = report.wall_time_ms;
  row.samples = report.unique_samples;
  row.rel_l2_error = relative_l2_error(report.recovered, signal.spectrum);
  row.success = row.rel_l2_error <= success_tolerance(params.eta);
  if (dense_baseline && row.n <= kOracleLimit) {
    const DenseVector grid = dense_md_samples(signal.spectrum);
    const auto start = std::chrono::steady_clock::now();
    const DenseVector coeffs = dense_md_coefficients(grid, signal.spectrum.lattice);
    row.dense_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

/// `trials` seeded trials after one discarded warm-up run.
inline std::vector<TrialRow> run_point(int dims, Index axis_size, const SupportParams& params,
                                       std::uint64_t seed, int trials) {
  run_trial(dims, axis_size, params, seed + 1000003);
  std::vector<TrialRow> rows;
  for (int t = 0; t < trials; ++t) {
    rows.push_back(run_trial(dims, axis_size, params, seed + static_cast<std::uint64_t>(t), true));
  }
  return rows;
}

/// Axis size with M^dims closest to 2^log2_n.
inline Index axis_for_log2(int dims, double log2_n) {
  return static_cast<Index>(std::llround(std::exp2(log2_n / dims)));
}

/// Exponents of the N sweep, capped at 2^45.
inline std::vector<int> default_n_exponents() { return {20, 24, 28, 32, 36, 40, 44}; }

/// Support sizes of the R sweep at N ~ 1e8.
inline std::vector<Index> default_r_values() { return {8, 16, 32, 64, 128, 256}; }

inline std::vector<TrialRow> bench_n(const RunConfig& cfg, const std::vector<int>& exponents = default_n_exponents()) {
  std::vector<TrialRow> rows;
  for (int e : exponents) {
    const auto point = run_point(cfg.dims, axis_for_log2(cfg.dims, e), cfg.params, cfg.seed, cfg.trials);
    rows.insert(rows.end(), point.begin(), point.end());
  }
  return rows;
}

inline std::vector<TrialRow> bench_r(const RunConfig& cfg, const std::vector<Index>& r_values = default_r_values()) {
  const Index axis = axis_for_log2(cfg.dims, std::log2(1e8));
  std::vector<TrialRow> rows;
  for (Index r : r_values) {
    SupportParams params = cfg.params;
    params.r_bound = r;
    const auto point = run_point(cfg.dims, axis, params, cfg.seed, cfg.trials);
    rows.insert(rows.end(), point.begin(), point.end());
  }
  return rows;
}

inline constexpr const char* kCsvHeader = "N,R,d,eta,seed,time_ms,samples,rel_l2_error,success,dense_ms";

inline void write_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << kCsvHeader << '\n';
  for (const TrialRow& row : rows) {
    std::ostringstream line;
    line.precision(17);
    line << row.n << ',' << row.r << ',' << row.d << ',' << row.eta << ',' << row.seed << ',';
    line.precision(6);
    line << row.time_ms << ',' << row.samples << ',' << row.rel_l2_error << ',' << (row.success ? 1 : 0) << ',';
    if (row.dense_ms) line << *row.dense_ms;
    out << line.str() << '\n';
  }
}

inline nlohmann::json rows_to_json(const std::vector<TrialRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const TrialRow& row : rows) {
    nlohmann::json j = {{"N", row.n},           {"R", row.r},         {"d", row.d},
                        {"eta", row.eta},       {"seed", row.seed},   {"time_ms", row.time_ms},
                        {"samples", row.samples}, {"rel_l2_error", row.rel_l2_error}, {"success", row.success}};
    if (row.dense_ms) j["dense_ms"] = *row.dense_ms;
    out.push_back(j);
  }
  return out;
}

template <class T>
double median(std::vector<T> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return static_cast<double>(values[mid]);
  return 0.5 * (static_cast<double>(values[mid - 1]) + static_cast<double>(values[mid]));
}

}  // namespace smfft
