#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

using namespace p2g;

namespace {

int cli(const std::string& args) {
    const std::string cmd = std::string(P2G_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path saved_window(const std::string& name, int first, int steps, double gas_scale = 1.0) {
    scenario::Scenario s = testkit::demo_window(first, steps);
    for (auto& p : s.profiles) {
        if (p.role != scenario::ProfileRole::GasWithdrawalKgPerS) continue;
        for (double& v : p.samples) v *= gas_scale;
    }
    return scenario::save_scenario(s, testkit::scratch_dir(name));
}

}  // namespace

TEST(Cli, RunWritesReportsAndLcoeReadsThem) {
    const auto root = saved_window("cli_run", 17000, 96);
    const auto out = testkit::scratch_dir("cli_run_out");
    ASSERT_EQ(cli("run -c " + root.string() + " -o " + out.string() + " --seed 3"), 0);
    EXPECT_TRUE(std::filesystem::exists(out / "plant_accounts.json"));
    const auto grid = out / "grid.csv";
    EXPECT_EQ(cli("lcoe -a " + (out / "plant_accounts.json").string() + " -o " + grid.string()), 0);
    std::ifstream in(grid);
    int lines = 0;
    for (std::string l; std::getline(in, l);) ++lines;
    EXPECT_EQ(lines, 1 + 24);
    EXPECT_EQ(cli("lcoe -a " + (out / "plant_accounts.json").string() + " --year 2050 --surplus-price 5"), 0);
}

TEST(Cli, RunYearAndPriceFlags) {
    const auto root = saved_window("cli_flags", 17000, 16);
    const auto out = testkit::scratch_dir("cli_flags_out");
    EXPECT_EQ(cli("run -c " + root.string() + " -o " + out.string() + " --year 2050 --surplus-price 30"), 0);
    EXPECT_NE(cli("run -c " + root.string() + " -o " + out.string() + " --year 2040"), 0);
    EXPECT_NE(cli("run -c " + root.string() + " -o " + out.string() + " --surplus-price -1"), 0);
}

TEST(Cli, InvariantViolationExitsNonZero) {
    const auto root = saved_window("cli_violation", 0, 96, 4.5);
    EXPECT_EQ(cli("run -c " + root.string() + " -o " + testkit::scratch_dir("cli_violation_out").string()), 2);
}

TEST(Cli, BadInputExitsNonZero) {
    EXPECT_NE(cli("run -c /nonexistent/scenario.json"), 0);
    EXPECT_NE(cli("bogus"), 0);
    const auto dir = testkit::scratch_dir("cli_bad");
    std::ofstream(dir / "scenario.json") << "{\"name\": 1";
    EXPECT_EQ(cli("run -c " + (dir / "scenario.json").string() + " -o " + dir.string()), 1);
}

TEST(Cli, ValidateGas) {
    EXPECT_EQ(cli("validate-gas"), 0);
    EXPECT_EQ(cli("validate-gas --limit 1e-6"), 2);
}

TEST(Cli, SynthMaterializesScenario) {
    const auto root = saved_window("cli_synth_src", 0, 8);
    const auto out = testkit::scratch_dir("cli_synth_out");
    ASSERT_EQ(cli("synth -c " + root.string() + " -o " + out.string() + " --seed 9"), 0);
    const auto s = scenario::load_scenario(out / "scenario.json");
    EXPECT_EQ(s.seed, 9u);
    EXPECT_EQ(s.time_grid.step_count, 8);
}
