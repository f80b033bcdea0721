#include "fixtures.hpp"
#include "p2gsim/sim_engine.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

using namespace p2g;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Pipeline, SavedScenarioReproducesTheRun) {
    const scenario::Scenario s = testkit::demo_window(16500, 192);
    const auto root = scenario::save_scenario(s, testkit::scratch_dir("pipeline_saved"));
    const scenario::Scenario back = scenario::load_scenario(root);
    const auto a = sim::run(s);
    const auto b = sim::run(back);
    const auto da = testkit::scratch_dir("pipeline_a");
    const auto db = testkit::scratch_dir("pipeline_b");
    const auto files = sim::emit_reports(a, da);
    sim::emit_reports(b, db);
    for (const auto& f : files) EXPECT_EQ(slurp(f), slurp(db / f.filename())) << f.filename();
}

TEST(Pipeline, AbsorbableSurplusLeavesNoReversePowerFlow) {
    const scenario::Scenario s = testkit::demo_window(16500, 192);
    const auto r = sim::run(s);
    const electric::RadialTopology topo(s.electrical);
    int checked = 0;
    for (const auto& rec : r.records) {
        for (std::size_t p = 0; p < s.plants.size(); ++p) {
            const auto& pr = rec.plants[p].result;
            const auto f = topo.feeder_of(s.plants[p].en_bus);
            const auto& fr = rec.feeders[f];
            const double headroom = s.plants[p].electrolyzer.nominal_power_kw - s.plants[p].electrolyzer.standby_power_kw;
            if (fr.surplus_kw > 0.0 && fr.surplus_kw < headroom && pr.effective_setpoint_kw == pr.setpoint_kw) {
                EXPECT_EQ(fr.rpf_kw, 0.0);
                EXPECT_NEAR(fr.absorbed_kw, fr.surplus_kw, 1e-3 + rec.power_flow_residual_kw);
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 10);
}

TEST(Pipeline, SeedChangesSyntheticProfilesOnly) {
    const auto root = testkit::data_dir() / "demo" / "scenario.json";
    const auto a = scenario::load_scenario(root, {std::uint64_t{1}});
    const auto& base = testkit::demo_scenario();
    EXPECT_NE(a.profiles, base.profiles);
    EXPECT_EQ(a.plants, base.plants);
    EXPECT_EQ(a.electrical, base.electrical);
}

TEST(Pipeline, SevenDayWinterRunConservesMass) {
    const scenario::Scenario s = testkit::demo_window(0, 7 * 96);
    const auto r = sim::run(s);
    EXPECT_LT(sim::gas_mass_balance_error(r), 1e-3);
    EXPECT_TRUE(sim::check_invariants(r, s).empty());
}
