#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string err;
};

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("peierls_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Result run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(PEIERLS_CLI_PATH) + " " + args + " 2> " + err.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

std::string config(const std::string& name) { return std::string(PEIERLS_CONFIG_DIR) + "/" + name; }

long lines(const fs::path& p) {
  std::ifstream in(p);
  long n = 0;
  for (std::string s; std::getline(in, s);) ++n;
  return n;
}

}  // namespace

TEST(Cli, BandsRowCount) {
  auto dir = scratch("bands");
  auto r = run("bands -c " + config("mathieu.json") + " -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(dir / "bands.csv") - 1, 32 * 4);
  auto meta = nlohmann::json::parse(slurp(dir / "bands.meta.json"));
  EXPECT_EQ(meta["rows"], 128);
  auto iv = nlohmann::json::parse(slurp(dir / "bands_intervals.json"));
  EXPECT_EQ(iv["intervals"].size(), 4u);
  EXPECT_TRUE(iv["intervals"][0]["simple"].get<bool>());
}

TEST(Cli, CsvNumberFormat) {
  auto dir = scratch("format");
  ASSERT_EQ(run("bands -c " + config("mathieu.json") + " -o " + dir.string(), dir).code, 0);
  std::ifstream in(dir / "bands.csv");
  std::string head, row;
  std::getline(in, head);
  std::getline(in, row);
  EXPECT_EQ(head, "point,t1,band,lambda");
  // 17 significant digits in exponent form
  EXPECT_EQ(row.substr(row.rfind(',') + 1).size(), std::string("-1.0647957251402413e+00").size());
  EXPECT_EQ(slurp(dir / "bands.csv").find('\r'), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
  auto a = scratch("rerun_a"), b = scratch("rerun_b");
  for (const char* cmd : {"bands", "section", "grushin", "effective"}) {
    ASSERT_EQ(run(std::string(cmd) + " -c " + config("mathieu.json") + " -o " + a.string(), a).code, 0) << cmd;
    ASSERT_EQ(run(std::string(cmd) + " -c " + config("mathieu.json") + " -o " + b.string(), b).code, 0) << cmd;
  }
  for (const char* f : {"bands.csv", "section.csv", "grushin.csv", "effective.csv"}) {
    const std::string x = slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
}

TEST(Cli, GrushinReport) {
  auto dir = scratch("grushin");
  ASSERT_EQ(run("grushin -c " + config("mathieu.json") + " -o " + dir.string(), dir).code, 0);
  auto j = nlohmann::json::parse(slurp(dir / "grushin.json"));
  EXPECT_LE(j["max_inverse_residual"].get<double>(), 1e-8);
  EXPECT_LE(j["max_emp_error"].get<double>(), 1e-8);
  EXPECT_EQ(lines(dir / "grushin.csv") - 1, 20);
}

TEST(Cli, EffectiveMatchesBandInterval) {
  auto dir = scratch("effective");
  ASSERT_EQ(run("bands -c " + config("mathieu.json") + " -o " + dir.string(), dir).code, 0);
  ASSERT_EQ(run("effective -c " + config("mathieu.json") + " -o " + dir.string() + " --mode bloch --radius 8", dir).code, 0);
  auto bands = nlohmann::json::parse(slurp(dir / "bands_intervals.json"));
  auto eff = nlohmann::json::parse(slurp(dir / "effective_spectrum.json"));
  ASSERT_EQ(eff["reconstructed"].size(), 1u);
  const auto j1 = bands["intervals"][0]["interval"];
  EXPECT_NEAR(eff["reconstructed"][0][0].get<double>(), j1[0].get<double>(), 1e-6);
  EXPECT_NEAR(eff["reconstructed"][0][1].get<double>(), j1[1].get<double>(), 1e-6);
}

TEST(Cli, InvalidFieldNamesHypothesis) {
  auto dir = scratch("invalid");
  auto r = run("bands -c " + config("invalid_h1.json") + " -o " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("H.1"), std::string::npos) << r.err;
}

TEST(Cli, ConfigErrorsExitTwo) {
  auto dir = scratch("errors");
  EXPECT_EQ(run("bands -c " + (dir / "missing.json").string(), dir).code, 2);
  EXPECT_EQ(run("nonsense", dir).code, 2);
  auto r = run("effective -c " + config("separable.json") + " -o " + dir.string() + " --flux 1/3", dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("does not match"), std::string::npos) << r.err;
}

TEST(Cli, CompareReport) {
  auto dir = scratch("compare");
  auto r = run("compare -c " + config("compare_quick.json") + " -o " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(dir / "compare.json"));
  for (const char* key : {"effective_vs_direct", "direct_vs_unperturbed"}) {
    ASSERT_EQ(j[key]["pairs"].size(), 3u) << key;
    EXPECT_TRUE(std::isfinite(j[key]["C"].get<double>())) << key;
  }
  EXPECT_GT(j["direct_vs_unperturbed"]["C"].get<double>(), 0);
}
