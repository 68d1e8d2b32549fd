#include "hconv/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hconv/problem_io.hpp"

namespace hconv::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome RunArgs(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hconv_cli_test_" + name)).string();
}

std::string WriteFile(const std::string& name, const std::string& text) {
  const std::string path = TempPath(name);
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool Has(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

TEST(Cli, ModulusHilbert) {
  const Outcome o = RunArgs({"modulus", "--p", "2", "--grid-points", "4"});
  EXPECT_EQ(o.code, kExitPass) << o.err;
  // 1 - sqrt(1 - 1/4) for eps = 1.
  EXPECT_TRUE(Has(o.out, "0.133974596")) << o.out;
  EXPECT_TRUE(Has(o.out, "HOLDS"));
}

TEST(Cli, ModulusPowerTypeFailsForP4) {
  const Outcome o = RunArgs({"modulus", "--p", "4", "--grid-points", "5"});
  EXPECT_EQ(o.code, kExitRefuted);
  EXPECT_TRUE(Has(o.out, "FAILS"));
  EXPECT_TRUE(Has(o.out, "violating eps"));
}

TEST(Cli, ModulusUsageErrors) {
  EXPECT_EQ(RunArgs({"modulus", "--p", "2", "--eps-grid", "0.5,2.5"}).code, kExitError);
  EXPECT_EQ(RunArgs({"modulus"}).code, kExitError);
  EXPECT_EQ(RunArgs({}).code, kExitError);
  EXPECT_EQ(RunArgs({"frobnicate"}).code, kExitError);
  EXPECT_EQ(RunArgs({"--help"}).code, kExitPass);
}

TEST(Cli, CertifyRankDeficientRefuted) {
  const Outcome o = RunArgs({"certify", "--registry", "remark-rank-deficient",
                             "--eps", "0.5", "--samples", "300"});
  EXPECT_EQ(o.code, kExitRefuted) << o.err;
  EXPECT_TRUE(Has(o.out, "REFUTED"));
  EXPECT_TRUE(Has(o.out, "-- witness 1 --"));
}

TEST(Cli, CertifyAutoRadius) {
  const Outcome o = RunArgs({"certify", "--registry", "positive-quadratic", "--eps",
                             "auto", "--samples", "300"});
  EXPECT_EQ(o.code, kExitPass) << o.err;
  EXPECT_TRUE(Has(o.out, "CERTIFIED"));
  EXPECT_TRUE(Has(o.out, "eps0                     0.1875"));
}

TEST(Cli, CertifyNeedsX0) {
  const std::string path = WriteFile(
      "nox0.pkp", "[space]\ndim = 2\n[map 1]\n1 : 1 0\n[map 2]\n1 : 0 1\n");
  const Outcome o = RunArgs({"certify", path, "--eps", "0.1"});
  EXPECT_EQ(o.code, kExitError);
  EXPECT_TRUE(Has(o.err, "x0 is required"));
  EXPECT_EQ(RunArgs({"certify", path, "--eps", "0.1", "--x0", "0,0", "--samples", "50"})
                .code,
            kExitPass);
  std::remove(path.c_str());
}

TEST(Cli, InputMustBeUnique) {
  EXPECT_EQ(RunArgs({"localize"}).code, kExitError);
  EXPECT_EQ(RunArgs({"localize", "a.pkp", "--registry", "disk-active"}).code, kExitError);
  EXPECT_EQ(RunArgs({"localize", "/nonexistent/x.pkp"}).code, kExitError);
}

TEST(Cli, Localize) {
  const Outcome o = RunArgs({"localize", "--registry", "disk-inactive", "--samples", "500"});
  EXPECT_EQ(o.code, kExitPass) << o.err;
  EXPECT_TRUE(Has(o.out, "x_eps                    (0.4, 0.5)")) << o.out;
  EXPECT_TRUE(Has(o.out, "lambda                   (0)"));
  const Outcome bad = RunArgs({"localize", "--registry", "disk-inactive", "--x0", "2,0"});
  EXPECT_EQ(bad.code, kExitError);
  EXPECT_TRUE(Has(bad.err, "Infeasible"));
}

TEST(Cli, DualityActive) {
  const Outcome o = RunArgs({"duality", "--registry", "disk-active", "--samples", "300",
                             "--lambda-grid", "40"});
  EXPECT_EQ(o.code, kExitPass) << o.err;
  EXPECT_TRUE(Has(o.out, "saddle point             PASS"));
}

TEST(Cli, CalmEmitsValueFunctionCsv) {
  const std::string csv = TempPath("calm.csv");
  const Outcome o = RunArgs({"calm", "--registry", "disk-active", "--samples", "100",
                             "--emit-samples", csv});
  EXPECT_EQ(o.code, kExitPass) << o.err;
  const auto rows = ReadCsv(ReadFile(csv));
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"y_1", "v_of_y", "feasible"}));
  std::remove(csv.c_str());
}

TEST(Cli, Witness) {
  const Outcome found = RunArgs({"witness", "--registry", "remark-linf", "--eps", "0.5",
                                 "--samples", "200"});
  EXPECT_EQ(found.code, kExitRefuted) << found.err;
  EXPECT_TRUE(Has(found.out, "witness                  found"));

  const std::string id = WriteFile(
      "id.pkp", "[space]\ndim = 2\n[map 1]\n1 : 1 0\n[map 2]\n1 : 0 1\n"
                "[defaults]\nx0 = 0 0\neps = 0.5\n");
  const Outcome none = RunArgs({"witness", id, "--samples", "100"});
  EXPECT_EQ(none.code, kExitPass) << none.err;
  EXPECT_TRUE(Has(none.out, "none found"));

  const std::string five = WriteFile(
      "five.pkp", "[space]\ndim = 5\n[map 1]\n1 : 1 0 0 0 0\n"
                  "[defaults]\nx0 = 0 0 0 0 0\neps = 0.5\n");
  const Outcome big = RunArgs({"witness", five});
  EXPECT_EQ(big.code, kExitError);
  EXPECT_TRUE(Has(big.err, "DimensionTooLarge"));
  std::remove(id.c_str());
  std::remove(five.c_str());
}

TEST(Cli, ReportsAreDeterministic) {
  const std::vector<std::string> args = {"certify", "--registry", "positive-quadratic",
                                         "--eps", "0.15", "--samples", "200",
                                         "--seed", "7", "--emit-samples",
                                         TempPath("pairs.csv")};
  const Outcome a = RunArgs(args);
  const std::string csv_a = ReadFile(TempPath("pairs.csv"));
  const Outcome b = RunArgs(args);
  const std::string csv_b = ReadFile(TempPath("pairs.csv"));
  EXPECT_EQ(a.code, b.code);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(csv_a, csv_b);
  EXPECT_TRUE(Has(a.out, "seed                     7"));
  EXPECT_EQ(ReadCsv(csv_a).size(), 201u);
  std::remove(TempPath("pairs.csv").c_str());
}

}  // namespace
}  // namespace hconv::cli
