#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SSDE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

TEST(Cli, MissingConfigFileIsConfigError) {
  EXPECT_EQ(run_cli("admit --config /nonexistent/config.json"), 1);
}

TEST(Cli, MalformedConfigIsConfigError) {
  const auto p = write_temp("ssde_cli_bad.json", R"({"experiment_id": "bad", "grid": {"nodes": -3}})");
  EXPECT_EQ(run_cli("admit --config " + p.string()), 1);
  const auto q = write_temp("ssde_cli_syntax.json", "{not json");
  EXPECT_EQ(run_cli("admit --config " + q.string()), 1);
}

TEST(Cli, UnknownFlagIsConfigError) { EXPECT_EQ(run_cli("admit --frobnicate"), 1); }

TEST(Cli, AdmitOnExampleSucceeds) {
  const auto out = std::filesystem::temp_directory_path() / "ssde_cli_admit";
  std::filesystem::remove_all(out);
  EXPECT_EQ(run_cli("admit --config " + std::string(SSDE_CONFIG_DIR) + "/outside_cond0.json --out " + out.string()),
            0);
  EXPECT_TRUE(std::filesystem::exists(out / "bundle.json"));
  std::filesystem::remove_all(out);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli("--help"), 0); }

}  // namespace
