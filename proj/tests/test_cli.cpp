// End-to-end tests for the command-line tool. Each test launches the real
// binary (path injected by the build as BANDSIS_CLI_PATH), captures stdout,
// and checks the JSON/CSV output plus exit codes.
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace {

using nlohmann::json;

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

// Run the CLI with the given argument string; stderr is discarded so that
// the captured stream is exactly what a consumer would pipe into a parser.
CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(BANDSIS_CLI_PATH) + " " + args + " 2>/dev/null";
  CmdResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    ADD_FAILURE() << "popen failed for: " << cmd;
    return result;
  }
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.out.append(buf.data(), got);
  }
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

TEST(Cli, CountBandGraph) {
  CmdResult r = run_cli("count --s 1 --t 1 --n 10");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  json doc = json::parse(r.out);
  EXPECT_EQ(doc["s"], 1);
  EXPECT_EQ(doc["t"], 1);
  EXPECT_EQ(doc["n"], 10);
  EXPECT_EQ(doc["count_decimal"], "89");
  EXPECT_NEAR(doc["log_count"].get<double>(), std::log(89.0), 1e-12);
}

TEST(Cli, TablesMcmcReference) {
  CmdResult r = run_cli("tables --which mcmc");
  ASSERT_EQ(r.exit_code, 0);
  json doc = json::parse(r.out);
  ASSERT_EQ(doc["table"].size(), 6u);
  EXPECT_EQ(doc["table"][0]["n"], 100);
  EXPECT_NEAR(doc["table"][0]["log_mcmc"].get<double>(), 33.7634, 1e-3);
  EXPECT_NEAR(doc["table"][5]["log_mcmc"].get<double>(), 61.7624, 1e-3);
}

TEST(Cli, OptprobsSingleRow) {
  CmdResult r = run_cli("optprobs --t 2");
  ASSERT_EQ(r.exit_code, 0);
  json doc = json::parse(r.out);
  EXPECT_EQ(doc["t"], 2);
  ASSERT_EQ(doc["p"].size(), 2u);
  EXPECT_NEAR(doc["p"][0].get<double>(), 0.45631, 1e-5);
  EXPECT_NEAR(doc["p"][1].get<double>(), 0.35220, 1e-5);
  EXPECT_LT(std::fabs(doc["residual_recurrence"].get<double>()), 1e-12);
}

TEST(Cli, CsvFormat) {
  // --format is accepted both before and after the subcommand name.
  CmdResult after = run_cli("count --s 2 --t 2 --n 6 --format csv");
  ASSERT_EQ(after.exit_code, 0);
  EXPECT_EQ(after.out.substr(0, after.out.find('\n')),
            "count_decimal,log_count,n,s,t");
  CmdResult before = run_cli("--format csv count --s 2 --t 2 --n 6");
  ASSERT_EQ(before.exit_code, 0);
  EXPECT_EQ(before.out, after.out);
  // Two lines: header + one row.
  int newlines = 0;
  for (char c : after.out) newlines += (c == '\n');
  EXPECT_EQ(newlines, 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("count --s 1 --t 1 --n 10 --bogus").exit_code, 2);
  EXPECT_EQ(run_cli("count --s 1 --t 1").exit_code, 2);  // --n is required
  EXPECT_EQ(run_cli("definitely-not-a-subcommand").exit_code, 2);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
  // Well-formed command line, failing computation: missing graph file.
  EXPECT_EQ(run_cli("count --graph /nonexistent/g.txt").exit_code, 1);
}

TEST(Cli, EstimateMatchesExactCount) {
  CmdResult r = run_cli(
      "estimate --s 1 --t 1 --n 12 --sampler sequence --samples 20000 --seed 5");
  ASSERT_EQ(r.exit_code, 0);
  json doc = json::parse(r.out);
  double log_est = doc["log_estimate"].get<double>();
  double se = doc["stderr_log"].get<double>();
  EXPECT_NEAR(log_est, std::log(233.0), 4.0 * se + 1e-9);  // F_13 = 233
  EXPECT_GT(doc["ess"].get<double>(), 1000.0);
  EXPECT_EQ(doc["n_samples"], 20000);
  EXPECT_EQ(doc["seed"], 5);
}

TEST(Cli, WorkerCountDoesNotChangeOutput) {
  const std::string base =
      "estimate --s 2 --t 2 --n 25 --sampler sequence --samples 2000 --seed 77";
  CmdResult w1 = run_cli(base + " --workers 1");
  CmdResult w4 = run_cli(base + " --workers 4");
  CmdResult w16 = run_cli(base + " --workers 16");
  ASSERT_EQ(w1.exit_code, 0);
  EXPECT_EQ(w1.out, w4.out);
  EXPECT_EQ(w1.out, w16.out);
}

TEST(Cli, StdoutIsPureJson) {
  // json::parse throws on trailing garbage, so this also guards against any
  // progress text leaking onto stdout.
  for (const std::string& args :
       {std::string("tables --which 3"), std::string("moments --s 2 --t 1 --n 50"),
        std::string("diag --kind states --s 2 --t 2"),
        std::string("diag --kind required --s 2 --t 1 --n 100")}) {
    CmdResult r = run_cli(args);
    ASSERT_EQ(r.exit_code, 0) << args;
    EXPECT_NO_THROW({ auto doc = json::parse(r.out); (void)doc; }) << args;
  }
}

TEST(Cli, DiagNaiveAndCrossover) {
  CmdResult nv = run_cli("diag --kind naive --s 2 --t 1 --n 600");
  ASSERT_EQ(nv.exit_code, 0);
  json doc = json::parse(nv.out);
  EXPECT_GT(doc["chi_sq"].get<double>(), 0.0);
  EXPECT_GT(doc["log_n_naive"].get<double>(), doc["log_n_el"].get<double>());

  CmdResult cx = run_cli("diag --kind crossover --s 2 --t 1");
  ASSERT_EQ(cx.exit_code, 0);
  json cdoc = json::parse(cx.out);
  long long n_star = cdoc["n_star"].get<long long>();
  EXPECT_GT(n_star, 900);
  EXPECT_LT(n_star, 8103);
}

}  // namespace
