#include "fixtures.hpp"
#include "p2gsim/scenario.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>

using namespace p2g;
using namespace p2g::scenario;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string error_of(const std::filesystem::path& root) {
    try {
        load_scenario(root);
    } catch (const ScenarioError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Calendar, DayOfYearRoundTrip) {
    EXPECT_EQ(day_of_year({1, 1}), 0);
    EXPECT_EQ(day_of_year({3, 1}), 59);
    EXPECT_EQ(day_of_year({12, 31}), 364);
    for (int d = 0; d < kDaysPerYear; ++d) EXPECT_EQ(day_of_year(month_day(d)), d);
}

TEST(Calendar, GridInstantsWrapTheYear) {
    const TimeGrid g = parse_time_grid("2030-12-31T23:45", 15, 4);
    EXPECT_EQ(g.at(0).day_of_year, 364);
    EXPECT_EQ(g.at(1).day_of_year, 0);
    EXPECT_EQ(g.at(1).month, 1);
    EXPECT_EQ(g.start_iso(), "2030-12-31T23:45");
    EXPECT_THROW(parse_time_grid("2030-02-30T00:00", 15, 4), ScenarioError);
    EXPECT_THROW(parse_time_grid("2030-01-01 00:00", 15, 4), ScenarioError);
    EXPECT_THROW(parse_time_grid("2030-01-01T00:00", 0, 4), ScenarioError);
}

TEST(Calendar, HeatingSeasonBoundaries) {
    const SeasonCalendar cal;
    const TimeGrid g = parse_time_grid("2030-01-01T00:00", 1440, 365);
    EXPECT_EQ(season_of(day_of_year({4, 15}), g, cal), Season::Heating);
    EXPECT_EQ(season_of(day_of_year({4, 16}), g, cal), Season::NonHeating);
    EXPECT_EQ(season_of(day_of_year({10, 14}), g, cal), Season::NonHeating);
    EXPECT_EQ(season_of(day_of_year({10, 15}), g, cal), Season::Heating);
    int heating = 0;
    for (int d = 0; d < 365; ++d) heating += season_of(d, g, cal) == Season::Heating;
    EXPECT_EQ(heating, 105 + 78);
}

TEST(Calendar, RejectsOverlapsAndReversedIntervals) {
    SeasonCalendar cal;
    cal.heating_intervals = {{{1, 1}, {4, 15}}, {{4, 10}, {5, 1}}};
    EXPECT_THROW(validate(cal), ScenarioError);
    cal.heating_intervals = {{{5, 1}, {4, 1}}};
    EXPECT_THROW(validate(cal), ScenarioError);
}

TEST(Demo, LoadsAndValidates) {
    const Scenario& s = testkit::demo_scenario();
    EXPECT_EQ(s.time_grid.step_count, 35040);
    EXPECT_EQ(s.plants.size(), 3u);
    EXPECT_EQ(s.electrical.transformers.size(), 3u);
    const electric::RadialTopology topo(s.electrical);
    EXPECT_EQ(topo.bus_count(), 43u);
    for (const auto& p : s.profiles) EXPECT_EQ(p.samples.size(), 35040u);
}

TEST(Demo, SyntheticTargetsAreMet) {
    const Scenario& s = testkit::demo_scenario();
    const std::size_t n = 35040;
    std::vector<double> gas(n, 0.0), res(n, 0.0);
    for (const auto& p : s.profiles) {
        for (std::size_t t = 0; t < n; ++t) {
            if (p.role == ProfileRole::GasWithdrawalKgPerS) gas[t] += p.samples[t];
            if (p.role == ProfileRole::ResGenerationKw) res[t] += p.samples[t];
        }
    }
    const double peak_mw = *std::max_element(gas.begin(), gas.end()) * s.ng_lhv_kwh_per_kg * 3.6;
    EXPECT_NEAR(peak_mw, 23.0, 1e-9);

    double h = 0.0, nh = 0.0, sm = 0.0, wm = 0.0;
    int ch = 0, cn = 0, cs = 0, cw = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const int step = static_cast<int>(t);
        if (season_of(step, s.time_grid, s.calendar) == Season::Heating) {
            h += gas[t];
            ++ch;
        } else {
            nh += gas[t];
            ++cn;
        }
        const int m = s.time_grid.at(step).month;
        if (m >= 6 && m <= 8) {
            sm += res[t];
            ++cs;
        } else if (m == 12 || m <= 2) {
            wm += res[t];
            ++cw;
        }
    }
    EXPECT_NEAR((h / ch) / (nh / cn), 10.0, 1e-9);
    EXPECT_NEAR((sm / cs) / (wm / cw), 2.0, 1e-6);
}

TEST(Demo, FeederLoadFactorsMatchTargets) {
    const Scenario& s = testkit::demo_scenario();
    const electric::RadialTopology topo(s.electrical);
    const double targets[] = {0.2289, 0.2025, 0.1289};
    const double caps[] = {3900.0, 9300.0, 5100.0};
    std::vector<double> energy(3, 0.0), peak(3, 0.0);
    std::vector<std::vector<double>> series(3, std::vector<double>(35040, 0.0));
    for (const auto& p : s.profiles) {
        if (p.role != ProfileRole::ElectricLoadKw) continue;
        const auto f = topo.feeder_of(p.node_id);
        for (std::size_t t = 0; t < p.samples.size(); ++t) series[f][t] += p.samples[t];
    }
    for (std::size_t f = 0; f < 3; ++f) {
        const double mean = std::accumulate(series[f].begin(), series[f].end(), 0.0) / 35040.0;
        EXPECT_NEAR(mean / caps[f], targets[f], 2e-3) << f;
        EXPECT_LE(*std::max_element(series[f].begin(), series[f].end()), caps[f] * (1.0 + 1e-12));
    }
}

TEST(Synthetic, DeterministicPerSeed) {
    const Scenario& s = testkit::demo_scenario();
    SyntheticTargets t;
    t.feeders = {{1, 3.9, 0.2289, 3.9, 0.8}, {2, 9.3, 0.2025, 4.5, 0.0}, {3, 5.1, 0.1289, 6.6, 3.6}};
    const auto a = synthesize_demo_profiles(s.time_grid, s.calendar, t, s.electrical, s.gas, 13.1, 5);
    const auto b = synthesize_demo_profiles(s.time_grid, s.calendar, t, s.electrical, s.gas, 13.1, 5);
    const auto c = synthesize_demo_profiles(s.time_grid, s.calendar, t, s.electrical, s.gas, 13.1, 6);
    EXPECT_EQ(a.profiles, b.profiles);
    EXPECT_NE(a.profiles, c.profiles);
    t.summer_to_winter_res_ratio = 50.0;
    EXPECT_THROW(synthesize_demo_profiles(s.time_grid, s.calendar, t, s.electrical, s.gas, 13.1, 5), ScenarioError);
}

TEST(Files, SaveLoadRoundTrip) {
    const Scenario s = testkit::demo_window(16000, 96);
    const auto dir = testkit::scratch_dir("roundtrip");
    const auto root = save_scenario(s, dir);
    const Scenario back = load_scenario(root);
    EXPECT_EQ(back, s);
    EXPECT_EQ(config_hash(back), config_hash(s));
}

TEST(Files, SeedOverrideAndHashSensitivity) {
    const Scenario s = testkit::demo_window(0, 8);
    const auto root = save_scenario(s, testkit::scratch_dir("seed"));
    const Scenario o = load_scenario(root, LoadOptions{42});
    EXPECT_EQ(o.seed, 42u);
    EXPECT_NE(config_hash(o), config_hash(s));
    Scenario t = s;
    t.profiles[0].samples[3] += 1e-9;
    EXPECT_NE(config_hash(t), config_hash(s));
    EXPECT_EQ(config_hash(s).size(), 16u);
}

TEST(Files, ProfileLengthMismatchNamesFileAndCounts) {
    const Scenario s = testkit::demo_window(0, 8);
    const auto dir = testkit::scratch_dir("mismatch");
    const auto root = save_scenario(s, dir);
    auto j = nlohmann::json::parse(std::ifstream(root));
    j["time_grid"]["step_count"] = 9;
    write(root, j.dump());
    const std::string msg = error_of(root);
    EXPECT_NE(msg.find("profiles.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("8 rows"), std::string::npos) << msg;
}

TEST(Files, MalformedCsvReportsLine) {
    const auto dir = testkit::scratch_dir("csv");
    write(dir / "p.csv", "step,electric_load_kW:2\n0,1.0\n1,abc\n");
    try {
        read_profiles(dir / "p.csv");
        FAIL();
    } catch (const ScenarioError& e) {
        EXPECT_NE(std::string(e.what()).find("p.csv:3"), std::string::npos) << e.what();
    }
    write(dir / "p.csv", "step,electric_load_kW:2\n0,1.0\n2,1.0\n");
    EXPECT_THROW(read_profiles(dir / "p.csv"), ScenarioError);
    write(dir / "p.csv", "step,bogus:2\n0,1.0\n");
    EXPECT_THROW(read_profiles(dir / "p.csv"), ScenarioError);
}

TEST(Files, UnknownKeysAndMissingSourcesAreRejected) {
    const Scenario s = testkit::demo_window(0, 8);
    const auto root = save_scenario(s, testkit::scratch_dir("keys"));
    auto j = nlohmann::json::parse(std::ifstream(root));
    auto bad = j;
    bad["gas"]["pressure"] = 3;
    write(root, bad.dump());
    EXPECT_NE(error_of(root).find("pressure"), std::string::npos);
    bad = j;
    bad.erase("profiles_csv");
    write(root, bad.dump());
    EXPECT_NE(error_of(root).find("exactly one"), std::string::npos);
}

TEST(Validate, CrossReferences) {
    Scenario s = testkit::demo_window(0, 8);
    EXPECT_NO_THROW(validate(s));
    Scenario t = s;
    t.plants[1].en_bus = t.plants[0].en_bus;
    EXPECT_THROW(validate(t), ScenarioError);
    t = s;
    t.plants[0].gn_node = s.gas.citygate;
    EXPECT_THROW(validate(t), ScenarioError);
    t = s;
    t.plants[0].gn_node = 9999;
    EXPECT_THROW(validate(t), ScenarioError);
    t = s;
    t.profiles[0].samples[2] = -1.0;
    EXPECT_THROW(validate(t), ScenarioError);
    t = s;
    t.gas_initial_pressure_barg = 6.0;
    EXPECT_THROW(validate(t), ScenarioError);
}

TEST(Rng, UnitUniformRange) {
    EXPECT_EQ(unit_uniform(0), 0.0);
    EXPECT_LT(unit_uniform(~0ULL), 1.0);
    EXPECT_DOUBLE_EQ(unit_uniform(1ULL << 63), 0.5);
}
