#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "test_util.hpp"

namespace {

using agghb::cli::run_cli;

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "agghb");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

bool has_line(const std::string& text, const std::string& line) {
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (l == line) return true;
  }
  return false;
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (l.rfind(key + "=", 0) == 0) return l.substr(key.size() + 1);
  }
  return {};
}

TEST(Cli, HelpAndUsage) {
  for (const char* sub : {"run", "tune", "verify", "constants", "parse-check"}) {
    const auto r = cli({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("Usage"), std::string::npos) << sub;
  }
  EXPECT_EQ(cli({"--help"}).code, 0);
  const auto unknown = cli({"frobnicate"});
  EXPECT_NE(unknown.code, 0);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);
  EXPECT_NE(cli({}).code, 0);
  EXPECT_EQ(cli({"constants", "--betas", "0.9", "--bogus", "1"}).code, 1);
}

TEST(Cli, Constants) {
  const auto r = cli({"constants", "--betas", "0.9,0.95,0.99"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "beta_hat").substr(0, 8), "0.976923");
  EXPECT_EQ(value_of(r.out, "m"), "3");
  for (const char* key : {"A", "B", "C", "D", "E", "F", "beta_tilde", "gamma_theory_ncvx",
                          "gamma_theory_cvx", "condition.nonconvex_margin"}) {
    EXPECT_FALSE(value_of(r.out, key).empty()) << key;
  }
  EXPECT_EQ(r.out, cli({"constants", "--betas", "0.9,0.95,0.99"}).out);

  const auto f = cli({"constants", "--betas", "0.5", "--gammas", "0.1", "--L", "1"});
  ASSERT_EQ(f.code, 0);
  EXPECT_EQ(value_of(f.out, "F"), "0.2");
  EXPECT_TRUE(has_line(f.out, "condition.F_vs_L lhs=0.2 rhs=0.25 margin=0.04999999999999999 PASS"))
      << f.out;

  EXPECT_EQ(cli({"constants", "--betas", "1.0"}).code, 1);
  EXPECT_EQ(cli({"constants", "--betas", "0.9, 0.5"}).code, 1);
  EXPECT_EQ(cli({"constants", "--betas", "0.9", "--gammas", "0.1,0.2"}).code, 1);
}

TEST(Cli, RunVerifyRoundTrip) {
  agghb::testing::TempDir dir("cli");
  const std::string out = (dir / "q.csv").string();
  const auto r = cli({"run", "--problem", "quadratic", "--betas", "0.9", "--gammas", "theory-cvx",
                      "--iters", "1000", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(out));
  EXPECT_TRUE(std::filesystem::exists(out + ".meta.json"));
  EXPECT_EQ(value_of(r.out, "recorded"), "1001");

  const auto v = cli({"verify", out});
  EXPECT_EQ(v.code, 0) << v.err << v.out;
  EXPECT_TRUE(has_line(v.out, "status=pass"));
  EXPECT_NE(v.out.find("K=1000 "), std::string::npos);

  // Same seed, same bytes.
  const std::string again = (dir / "q2.csv").string();
  ASSERT_EQ(cli({"run", "--problem", "quadratic", "--betas", "0.9", "--gammas", "theory-cvx",
                 "--iters", "1000", "--out", again})
                .code,
            0);
  const auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(out), slurp(again));
}

TEST(Cli, TunedTraceVerifyExitsTwo) {
  agghb::testing::TempDir dir("cli-tune");
  const std::string out = (dir / "t.csv").string();
  const auto r = cli({"run", "--problem", "quadratic", "--dim", "3", "--betas", "0.9,0.99",
                      "--gammas", "tune", "--iters", "50", "--jobs", "1", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "stepsize_source"), "tuned");
  const auto v = cli({"verify", out});
  EXPECT_EQ(v.code, 2);
  EXPECT_NE(v.err.find("theoretical"), std::string::npos);
}

TEST(Cli, CorruptTraceExitsOneWithLine) {
  agghb::testing::TempDir dir("cli-corrupt");
  const std::string out = (dir / "c.csv").string();
  ASSERT_EQ(cli({"run", "--problem", "quadratic", "--betas", "0.5", "--gammas", "0.1", "--iters",
                 "5", "--out", out})
                .code,
            0);
  std::ofstream(out, std::ios::app) << "6,1,notanumber,,\n";
  const auto v = cli({"verify", out});
  EXPECT_EQ(v.code, 1);
  EXPECT_NE(v.err.find("line 8"), std::string::npos) << v.err;
}

TEST(Cli, RunFlagErrors) {
  // logistic without data
  EXPECT_EQ(cli({"run", "--problem", "logreg-l2", "--betas", "0.9", "--gammas", "0.1"}).code, 1);
  // data on a problem that takes none
  EXPECT_EQ(cli({"run", "--problem", "quadratic", "--data", "x", "--betas", "0.9"}).code, 1);
  // missing data file
  EXPECT_EQ(cli({"run", "--problem", "logreg-l2", "--data", "/nonexistent/file", "--betas",
                 "0.9"})
                .code,
            1);
  // --l2 on the wrong problem
  EXPECT_EQ(cli({"run", "--problem", "logreg-ncvx", "--data", "synthetic", "--l2", "1", "--betas",
                 "0.9"})
                .code,
            1);
  EXPECT_EQ(cli({"run", "--problem", "nope", "--betas", "0.9"}).code, 1);
  EXPECT_EQ(cli({"run", "--problem", "quadratic", "--betas", "0.9", "--kind", "hb", "--betas",
                 "0.9,0.8"})
                .code,
            1);
  EXPECT_EQ(cli({"run", "--problem", "rosenbrock", "--betas", "0.9", "--gammas", "theory-cvx"})
                .code,
            1);
}

TEST(Cli, DataDirFallbackAndParseCheck) {
  agghb::testing::TempDir dir("cli-data");
  std::ofstream(dir / "tiny") << "1 1:0.5 2:1\n0 2:-1\n1 1:1 # note\n";
  const auto direct = cli({"parse-check", (dir / "tiny").string()});
  ASSERT_EQ(direct.code, 0) << direct.err;
  EXPECT_EQ(value_of(direct.out, "records"), "3");
  EXPECT_EQ(value_of(direct.out, "features"), "2");
  EXPECT_EQ(value_of(direct.out, "binary"), "1");

  ::setenv("AGGHB_DATA_DIR", dir.path().c_str(), 1);
  const auto via_env = cli({"parse-check", "tiny"});
  EXPECT_EQ(via_env.code, 0) << via_env.err;
  EXPECT_EQ(via_env.out, direct.out);
  const std::string out = (dir / "l.csv").string();
  const auto run = cli({"run", "--problem", "logreg-l2", "--data", "tiny", "--betas", "0.9",
                        "--gammas", "theory-cvx", "--iters", "20", "--out", out});
  EXPECT_EQ(run.code, 0) << run.err;
  EXPECT_EQ(cli({"verify", out}).code, 0);
  ::unsetenv("AGGHB_DATA_DIR");

  std::ofstream(dir / "bad") << "1 1:1\n1 1:2 1:3\n";
  const auto bad = cli({"parse-check", (dir / "bad").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos);
}

TEST(Cli, TuneSubcommand) {
  const auto r = cli({"tune", "--problem", "quadratic", "--dim", "2", "--kind", "gd", "--iters",
                      "200", "--x0", "1,-3", "--jobs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  // L = 2 on diag(1, 2); a = 1 gives gamma = 1/2, which zeroes the second
  // coordinate in one step and halves the first each step.
  EXPECT_EQ(value_of(r.out, "best_a"), "1");
  std::size_t sweeps = 0;
  std::istringstream in(r.out);
  for (std::string l; std::getline(in, l);) sweeps += l.rfind("sweep ", 0) == 0;
  EXPECT_EQ(sweeps, 15u);
}

TEST(Cli, SyntheticLogisticNonconvexRunVerifies) {
  agghb::testing::TempDir dir("cli-ncvx");
  const std::string out = (dir / "n.csv").string();
  const auto r = cli({"run", "--problem", "logreg-ncvx", "--data", "synthetic", "--betas",
                      "0.9,0.95", "--gammas", "theory-ncvx", "--iters", "100", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = cli({"verify", out});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_TRUE(has_line(v.out, "bound=nonconvex"));
}

}  // namespace
