#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(MORANLAB_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_file(const std::string& name, const std::string& body) {
  const std::string path = testing::TempDir() + name;
  std::ofstream(path) << body;
  return path;
}

TEST(Cli, ExactOnK4) {
  const auto r = run("exact --family complete --n 4 --s 2");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["f"].size(), 4u);
  for (const auto& f : j["f"]) EXPECT_NEAR(f.get<double>(), 8.0 / 15, 1e-12);
}

TEST(Cli, GenerateTriangle) {
  const auto r = run("generate --n 3 --p 1 --seed 5");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "3 3\n0 1\n0 2\n1 2\n");
}

TEST(Cli, RecurrenceReportsGamblerReference) {
  const auto r = run("recurrence --family bdf3 --alpha 1 --s 2 --m 200 --landing j-1");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["gambler_reference"]["within_tolerance"].get<bool>());
  EXPECT_NEAR(j["p_1"].get<double>(), 0.5, 1e-6);
  EXPECT_TRUE(j["convergence"]["converged"].get<bool>());
}

TEST(Cli, RecurrenceCsv) {
  const auto r = run("recurrence --family dbf3 --dx1 2 --s 2 --m 10 --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "j,p_delta0,p_delta1");
  EXPECT_NE(r.out.find("\n10,0,0\n"), std::string::npos);
}

TEST(Cli, SeedFromEnvironmentAndFlagPrecedence) {
  const auto env = run("generate --n 40 --p 0.2 --seed 9");
  const auto via_env = [] {
    setenv("MORANLAB_SEED", "9", 1);
    auto r = run("generate --n 40 --p 0.2");
    unsetenv("MORANLAB_SEED");
    return r;
  }();
  EXPECT_EQ(env.out, via_env.out);
  setenv("MORANLAB_SEED", "3", 1);
  const auto flag = run("generate --n 40 --p 0.2 --seed 9");
  unsetenv("MORANLAB_SEED");
  EXPECT_EQ(flag.out, env.out);
}

TEST(Cli, ConfigFile) {
  const auto cfg = temp_file("moranlab.ini", "n = 40\np = 0.2\nseed = 9\n");
  const auto from_cfg = run("generate --config " + cfg);
  const auto direct = run("generate --n 40 --p 0.2 --seed 9");
  ASSERT_EQ(from_cfg.code, 0);
  EXPECT_EQ(from_cfg.out, direct.out);
}

TEST(Cli, EstimateRecordIsReproducible) {
  const auto a = run("estimate --n 200 --p 0.05 --s 2 --runs 200 --seed 4");
  const auto b = run("estimate --n 200 --p 0.05 --s 2 --runs 200 --seed 4");
  ASSERT_EQ(a.code, 0);
  auto ja = nlohmann::json::parse(a.out);
  auto jb = nlohmann::json::parse(b.out);
  ja.erase("wall_seconds");
  jb.erase("wall_seconds");
  EXPECT_EQ(ja, jb);
  EXPECT_EQ(ja["estimate"]["runs"], 200);
}

TEST(Cli, AuditEmitsThirteenProperties) {
  const auto r = run("audit --n 300 --p 0.03 --seed 2 --samples 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["properties"].size(), 13u);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("generate --n 10 --p 2").code, 2);
  EXPECT_EQ(run("estimate --n 10 --p 0.5 --runs 0").code, 2);
  EXPECT_EQ(run("exact --family complete --n 3 --s 0").code, 2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("exact --family complete --n 17 --s 2").code, 4);
  const auto split = temp_file("moranlab_split.txt", "4 2\n0 1\n2 3\n");
  EXPECT_EQ(run("exact --graph " + split).code, 3);
  EXPECT_EQ(run("estimate --n 20 --p 1 --v0-rule min-degree --retries 3").code, 3);
  EXPECT_EQ(run("recurrence --family bdf3 --s 0.5").code, 2);
}

}  // namespace
