// smfft: sparse multidimensional FFT front end.
//
//   smfft transform --signal demos/walkthrough.json
//   smfft verify --d 2 --m 16 --r 5 --eta 0
//   smfft bench-n --trials 20 --out bench_n.csv
//   smfft bench-r --trials 10
//   smfft selftest
//
// Exit codes: 0 ok, 1 other error, 2 parse error, 3 support failure,
// 4 value failure, 5 dense oracle refused.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "smfft/bench.hpp"
#include "smfft/selftest.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kParse = 2,
  kSupport = 3,
  kValue = 4,
  kOracle = 5,
};

smfft::SignalSpec input_signal(const smfft::RunConfig& cfg, bool eta_given) {
  smfft::SignalSpec signal;
  if (cfg.signal_path) {
    signal = smfft::load_signal(*cfg.signal_path);
    if (eta_given) {
      signal.noise = cfg.params.eta > 0.0
                         ? smfft::NoiseModel{cfg.params.eta, smfft::NoiseModel::Kind::gaussian, cfg.seed}
                         : smfft::NoiseModel{};
    }
  } else {
    signal = smfft::random_signal(cfg.dims, cfg.axis_size, cfg.params.r_bound, cfg.params.eta, cfg.seed);
  }
  return signal;
}

/// The algorithm's noise estimate follows the signal actually sampled.
smfft::SupportParams params_for(const smfft::RunConfig& cfg, const smfft::SignalSpec& signal) {
  smfft::SupportParams params = cfg.params;
  params.eta = signal.noise.kind == smfft::NoiseModel::Kind::gaussian ? signal.noise.eta : 0.0;
  return params;
}

void emit(const smfft::RunConfig& cfg, const std::string& text) {
  if (cfg.output) {
    std::ofstream out(*cfg.output);
    if (!out) throw smfft::Error("cannot write '" + *cfg.output + "'");
    out << text;
  } else {
    std::cout << text;
  }
}

int run_single(const smfft::RunConfig& cfg, bool eta_given, bool verify) {
  const smfft::SignalSpec signal = input_signal(cfg, eta_given);
  const smfft::SupportParams params = params_for(cfg, signal);
  std::optional<smfft::MdSpectrum> truth;
  if (verify) truth = smfft::dense_reference(signal.spectrum);  // may refuse large N
  smfft::RunReport report = smfft::run_recovery(signal, params, cfg.seed);
  if (truth) report.rel_l2_error = smfft::relative_l2_error(report.recovered, *truth);

  if (cfg.format == smfft::OutputFormat::csv) {
    std::ostringstream out;
    out << "index,value\n";
    for (const auto& [j, v] : report.recovered.entries) {
      for (std::size_t i = 0; i < j.size(); ++i) out << (i ? " " : "") << j[i];
      out << ',' << v << '\n';
    }
    emit(cfg, out.str());
  } else {
    emit(cfg, smfft::report_to_json(report, params).dump(2) + "\n");
  }
  return kOk;
}

int run_sweep(const smfft::RunConfig& cfg, bool over_n) {
  const auto rows = over_n ? smfft::bench_n(cfg) : smfft::bench_r(cfg);
  if (cfg.format == smfft::OutputFormat::json) {
    emit(cfg, smfft::rows_to_json(rows).dump(2) + "\n");
  } else {
    std::ostringstream out;
    smfft::write_csv(out, rows);
    emit(cfg, out.str());
  }
  // Per-point summary on stderr: median time, median samples, success rate.
  std::map<std::pair<smfft::Index, smfft::Index>, std::vector<smfft::TrialRow>> points;
  for (const auto& row : rows) points[{row.n, row.r}].push_back(row);
  for (const auto& [key, group] : points) {
    std::vector<double> times;
    std::vector<std::size_t> samples;
    int ok = 0;
    for (const auto& row : group) {
      times.push_back(row.time_ms);
      samples.push_back(row.samples);
      ok += row.success;
    }
    std::cerr << "N=" << key.first << " R=" << key.second << " median_ms=" << smfft::median(times)
              << " median_samples=" << smfft::median(samples) << " success=" << ok << "/" << group.size()
              << "\n";
  }
  return kOk;
}

int run_selftest(const smfft::RunConfig& cfg) {
  bool all = true;
  std::ostringstream out;
  for (const auto& suite : smfft::run_selftest(cfg.seed)) {
    out << (suite.passed ? "PASS " : "FAIL ") << suite.name << " (" << suite.detail << ", " << suite.seconds
        << " s)\n";
    all = all && suite.passed;
  }
  out << (all ? "all suites passed" : "some suites FAILED") << "\n";
  emit(cfg, out.str());
  return all ? kOk : kOther;
}

}  // namespace

int main(int argc, char** argv) {
  smfft::RunConfig cfg;
  CLI::App app{"Sparse multidimensional FFT for nonnegative sparse spectra"};
  app.add_option("command", cfg.command, "transform | verify | bench-n | bench-r | selftest")
      ->required()
      ->check(CLI::IsMember({"transform", "verify", "bench-n", "bench-r", "selftest"}));
  app.add_option("--signal", cfg.signal_path, "signal JSON file (default: random signal from --d --m --r)");
  app.add_option("--m", cfg.axis_size, "points per axis M")->check(CLI::PositiveNumber);
  app.add_option("--d", cfg.dims, "dimension d")->check(CLI::Range(1, 8));
  app.add_option("--r", cfg.params.r_bound, "sparsity bound R")->check(CLI::PositiveNumber);
  app.add_option("--alpha", cfg.params.alpha, "filter parameter alpha");
  app.add_option("--delta", cfg.params.delta, "threshold parameter delta");
  app.add_option("--rho", cfg.params.rho, "largest ladder factor");
  app.add_option("--p", cfg.params.p_fail, "target failure probability");
  auto* eta_opt = app.add_option("--eta", cfg.params.eta, "noise level eta");
  app.add_option("--mu", cfg.params.mu, "smallest nonzero amplitude estimate");
  app.add_option("--delta-ratio", cfg.params.delta_ratio, "dynamic range estimate");
  app.add_option("--window-factor", cfg.params.window_factor, "bandwidth constant C (K = C * K_0)");
  app.add_option("--seed", cfg.seed, "random seed (SMFFT_SEED overrides)");
  app.add_option("--trials", cfg.trials, "trials per sweep point")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "csv | json")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, smfft::OutputFormat>{{"csv", smfft::OutputFormat::csv},
                                                     {"json", smfft::OutputFormat::json}}));
  app.add_option("--out", cfg.output, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }
  if (const char* env = std::getenv("SMFFT_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: SMFFT_SEED must be an unsigned integer\n";
      return kParse;
    }
  }

  try {
    cfg.params.validate();
    if (cfg.command == "transform") return run_single(cfg, eta_opt->count() > 0, false);
    if (cfg.command == "verify") return run_single(cfg, eta_opt->count() > 0, true);
    if (cfg.command == "bench-n") return run_sweep(cfg, true);
    if (cfg.command == "bench-r") return run_sweep(cfg, false);
    return run_selftest(cfg);
  } catch (const smfft::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const smfft::CandidateBlowup& e) {
    std::cerr << "support recovery failed: " << e.what() << "\n";
    return kSupport;
  } catch (const smfft::ContractionFailure& e) {
    std::cerr << "value recovery failed: " << e.what() << "\n";
    return kValue;
  } catch (const smfft::OracleTooLarge& e) {
    std::cerr << "oracle refused: " << e.what() << "\n";
    return kOracle;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
}
