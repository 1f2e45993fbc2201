#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "smfft/bench.hpp"
#include "smfft/selftest.hpp"

namespace smfft {
namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + SMFFT_CLI_PATH + " " + args + " 2>/dev/null";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

nlohmann::json without_timing(nlohmann::json doc) {
  doc.erase("wall_time_ms");
  doc.erase("oracle_time_ms");
  return doc;
}

const char* kWalkthrough = R"({"dims": 1, "axis_size": 40, "support": [[1], [23], [35]], "values": [1, 1, 1]})";

TEST(SignalFiles, ParseAndRoundTrip) {
  const SignalSpec spec = parse_signal(nlohmann::json::parse(kWalkthrough));
  EXPECT_EQ(spec.spectrum.lattice.total, 40u);
  EXPECT_EQ(spec.spectrum.size(), 3u);
  EXPECT_EQ(spec.noise.kind, NoiseModel::Kind::none);
  const SignalSpec again = parse_signal(signal_to_json(spec));
  EXPECT_EQ(again.spectrum.entries, spec.spectrum.entries);

  const SignalSpec flat = parse_signal(nlohmann::json::parse(
      R"({"dims": 1, "axis_size": 8, "support": [2, 5], "values": [0.5, 1.5], "noise": {"eta": 0.001, "seed": 3}})"));
  EXPECT_EQ(flat.spectrum.size(), 2u);
  EXPECT_EQ(flat.noise.kind, NoiseModel::Kind::gaussian);
  EXPECT_EQ(flat.noise.seed, 3u);
}

TEST(SignalFiles, RejectsMalformedInput) {
  for (const char* bad : {R"([1, 2])", R"({"dims": 1})",
                          R"({"dims": 1, "axis_size": 8, "support": [[9]], "values": [1]})",
                          R"({"dims": 2, "axis_size": 8, "support": [[1, 1]], "values": [-1]})",
                          R"({"dims": 1, "axis_size": 8, "support": [[1], [1]], "values": [1, 1]})",
                          R"({"dims": 1, "axis_size": 8, "support": [[1]], "values": [1, 2]})"}) {
    EXPECT_THROW(parse_signal(nlohmann::json::parse(bad)), ParseError) << bad;
  }
  EXPECT_THROW(load_signal("/nonexistent/signal.json"), ParseError);
}

TEST(Reports, IdenticalSeedsGiveIdenticalJson) {
  const SignalSpec signal = random_signal(3, 64, 20, 1e-2, 5);
  SupportParams params;
  params.r_bound = 20;
  params.eta = 1e-2;
  const RunReport a = run_recovery(signal, params, 99);
  const RunReport b = run_recovery(signal, params, 99);
  EXPECT_EQ(report_to_json(a, params, false).dump(), report_to_json(b, params, false).dump());
  EXPECT_FALSE(report_to_json(a, params, false).contains("wall_time_ms"));
  EXPECT_TRUE(report_to_json(a, params, true).contains("wall_time_ms"));
}

TEST(Reports, TrialRowsAndCsvSchema) {
  SupportParams params;
  params.r_bound = 8;
  params.eta = 0.0;
  const auto rows = run_point(2, 64, params, 3, 3);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    EXPECT_TRUE(row.success);
    EXPECT_EQ(row.n, 4096u);
    EXPECT_TRUE(row.dense_ms.has_value());
    EXPECT_GT(row.samples, 0u);
  }
  std::ostringstream csv;
  write_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string header, line;
  std::getline(lines, header);
  EXPECT_EQ(header, "N,R,d,eta,seed,time_ms,samples,rel_l2_error,success,dense_ms");
  int count = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9) << line;
    ++count;
  }
  EXPECT_EQ(count, 3);
  EXPECT_EQ(axis_for_log2(3, 30), 1024u);
  EXPECT_DOUBLE_EQ(median(std::vector<int>{5, 1, 3}), 3.0);
  EXPECT_DOUBLE_EQ(median(std::vector<int>{4, 1, 3, 2}), 2.5);
}

TEST(Selftest, AllSuitesPass) {
  for (const auto& suite : run_selftest(1)) EXPECT_TRUE(suite.passed) << suite.name << ": " << suite.detail;
}

Index off_by_one_inverse(Index q, Index m) { return (mod_inverse(q, m) + 1) % m; }

TEST(Selftest, CorruptedInverseIsCaught) {
  SelftestHooks hooks;
  hooks.mod_inverse = &off_by_one_inverse;
  EXPECT_FALSE(suite_isomorphism(hooks).passed);
  EXPECT_FALSE(suite_hash_identity(1, hooks).passed);
}

TEST(Cli, TransformWalkthrough) {
  const std::string path = write_temp("smfft_walkthrough.json", kWalkthrough);
  const Outcome r = run_cli("transform --signal " + path);
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["recovered"]["support"], nlohmann::json::parse("[[1], [23], [35]]"));
  EXPECT_FALSE(doc.contains("rel_l2_error"));
}

TEST(Cli, EmptySignal) {
  const std::string path =
      write_temp("smfft_empty.json", R"({"dims": 2, "axis_size": 16, "support": [], "values": []})");
  const Outcome r = run_cli("verify --signal " + path);
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc["recovered"]["support"].empty());
  EXPECT_EQ(doc["rel_l2_error"].get<double>(), 0.0);
}

TEST(Cli, VerifyAgainstDenseOracle) {
  const Outcome clean = run_cli("verify --d 2 --m 16 --r 5 --eta 0 --seed 4");
  ASSERT_EQ(clean.code, 0);
  EXPECT_LE(nlohmann::json::parse(clean.out)["rel_l2_error"].get<double>(), 1e-8);
  const Outcome noisy = run_cli("verify --d 2 --m 64 --r 10 --eta 0.01 --seed 4");
  ASSERT_EQ(noisy.code, 0);
  const double err = nlohmann::json::parse(noisy.out)["rel_l2_error"].get<double>();
  EXPECT_GT(err, 1e-5);
  EXPECT_LE(err, 3e-2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("frobnicate").code, 2);
  EXPECT_EQ(run_cli("transform --format xml").code, 2);
  const std::string bad = write_temp("smfft_bad.json", R"({"dims": 1, "axis_size": )");
  EXPECT_EQ(run_cli("transform --signal " + bad).code, 2);
  EXPECT_EQ(run_cli("verify --d 3 --m 128").code, 5);
  EXPECT_EQ(run_cli("transform --eta 0.5").code, 1);  // eta above delta*mu/2
  // A dense spectrum with R = 1 overflows the candidate cap.
  nlohmann::json dense = {{"dims", 1}, {"axis_size", 1 << 14}, {"support", nlohmann::json::array()},
                          {"values", nlohmann::json::array()}};
  for (int j = 0; j < 2048; ++j) {
    dense["support"].push_back({j});
    dense["values"].push_back(1.0);
  }
  const std::string blow = write_temp("smfft_dense.json", dense.dump());
  EXPECT_EQ(run_cli("transform --r 1 --signal " + blow).code, 3);
}

TEST(Cli, SeedEnvironmentOverride) {
  const Outcome a = run_cli("transform --d 2 --m 64 --r 6 --seed 1", "SMFFT_SEED=77");
  const Outcome b = run_cli("transform --d 2 --m 64 --r 6 --seed 2", "SMFFT_SEED=77");
  const Outcome c = run_cli("transform --d 2 --m 64 --r 6 --seed 77");
  ASSERT_EQ(a.code, 0);
  const auto ja = without_timing(nlohmann::json::parse(a.out));
  EXPECT_EQ(ja["seed"], 77);
  EXPECT_EQ(ja.dump(), without_timing(nlohmann::json::parse(b.out)).dump());
  EXPECT_EQ(ja.dump(), without_timing(nlohmann::json::parse(c.out)).dump());
}

TEST(Cli, SweepCsv) {
  const std::string out = (std::filesystem::temp_directory_path() / "smfft_sweep.csv").string();
  const Outcome r = run_cli("bench-r --trials 1 --d 2 --eta 0 --out " + out);
  ASSERT_EQ(r.code, 0);
  std::ifstream in(out);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, kCsvHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(default_r_values().size()));
}

TEST(Cli, SelftestCommand) {
  const Outcome r = run_cli("selftest");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("all suites passed"), std::string::npos);
}

}  // namespace
}  // namespace smfft
