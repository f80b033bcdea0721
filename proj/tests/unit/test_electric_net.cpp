#include "oracles.hpp"
#include "p2gsim/electric_net.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace p2g::electric;

namespace {

ElectricalNetwork two_bus(double r, double x) {
    ElectricalNetwork n;
    n.transformers = {{1, 1, 15.0}};
    n.branches = {{1, 2, r, x, 1.0}};
    return n;
}

}  // namespace

TEST(RadialTopology, OrdersParentsBeforeChildren) {
    ElectricalNetwork n;
    n.transformers = {{1, 1, 15.0}, {2, 10, 15.0}};
    n.branches = {{3, 2, 0.01, 0.01, 1}, {1, 2, 0.01, 0.01, 1}, {10, 11, 0.01, 0.01, 1}, {2, 4, 0.01, 0.01, 1}};
    const RadialTopology t(n);
    ASSERT_EQ(t.bus_count(), 6u);
    ASSERT_EQ(t.feeder_count(), 2u);
    for (std::size_t k = 0; k < t.bus_count(); ++k) {
        const Bus& b = t.buses()[k];
        if (b.parent >= 0) {
            EXPECT_LT(static_cast<std::size_t>(b.parent), k);
            EXPECT_EQ(t.branches()[b.parent_branch].to, b.id);
        }
    }
    EXPECT_EQ(t.feeder_of(3), 0u);
    EXPECT_EQ(t.feeder_of(11), 1u);
}

TEST(RadialTopology, RejectsLoops) {
    ElectricalNetwork n;
    n.transformers = {{1, 1, 15.0}};
    n.branches = {{1, 2, 0.01, 0.01, 1}, {2, 3, 0.01, 0.01, 1}, {3, 1, 0.01, 0.01, 1}};
    EXPECT_THROW(RadialTopology{n}, TopologyError);
}

TEST(RadialTopology, RejectsFeedersJoinedTogether) {
    ElectricalNetwork n;
    n.transformers = {{1, 1, 15.0}, {2, 3, 15.0}};
    n.branches = {{1, 2, 0.01, 0.01, 1}, {2, 3, 0.01, 0.01, 1}};
    EXPECT_THROW(RadialTopology{n}, TopologyError);
}

TEST(RadialTopology, RejectsIslandsAndSelfLoops) {
    ElectricalNetwork n;
    n.transformers = {{1, 1, 15.0}};
    n.branches = {{1, 2, 0.01, 0.01, 1}, {5, 6, 0.01, 0.01, 1}};
    EXPECT_THROW(RadialTopology{n}, TopologyError);
    n.branches = {{1, 1, 0.01, 0.01, 1}};
    EXPECT_THROW(RadialTopology{n}, TopologyError);
    n.transformers.clear();
    EXPECT_THROW(RadialTopology{n}, TopologyError);
}

TEST(Bfs, TwoBusResistiveGolden) {
    const RadialTopology t(two_bus(0.01, 0.0));
    const std::vector<Complex> s{{0, 0}, {-0.1, 0.0}};
    const auto st = bfs_power_flow(t, s);
    EXPECT_NEAR(std::abs(st.voltage[1]), 0.9989989979949860, 1e-10);
    const double loss = std::norm(st.branch_current[0]) * 0.01;
    EXPECT_NEAR(st.transformer_import_pu[0], 0.1 + loss, 1e-10);
    EXPECT_NEAR(st.feeder_losses_pu[0], loss, 1e-15);
}

TEST(Bfs, ZeroInjectionIsFlatAtSlackVoltage) {
    auto n = two_bus(0.02, 0.03);
    n.slack_voltage_pu = 1.03;
    const RadialTopology t(n);
    const auto st = bfs_power_flow(t, std::vector<Complex>(2));
    EXPECT_DOUBLE_EQ(st.voltage[1].real(), 1.03);
    EXPECT_EQ(st.transformer_import_pu[0], 0.0);
}

TEST(Bfs, ReversePowerFlowWhenGenerationExceedsLoad) {
    const RadialTopology t(two_bus(0.01, 0.01));
    const auto st = bfs_power_flow(t, std::vector<Complex>{{0, 0}, {0.2, 0.0}});
    EXPECT_LT(st.transformer_import_pu[0], -0.19);
    EXPECT_GT(std::abs(st.voltage[1]), 1.0);
    const FeederTotals totals{100.0, 2100.0};
    const auto bal = transformer_balance(t, st, std::span(&totals, 1));
    EXPECT_NEAR(bal[0].rpf_kw, -bal[0].import_kw, 0.0);
    EXPECT_DOUBLE_EQ(bal[0].surplus_kw, 2000.0);
}

TEST(Bfs, MatchesNewtonOnRandomRadialNetworks) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto c = p2g::testkit::random_radial(seed);
        const RadialTopology t(c.network);
        const auto st = bfs_power_flow(t, c.injections, {1e-12, 200});
        const auto ref = p2g::testkit::newton_power_flow(t, c.injections);
        for (std::size_t k = 0; k < t.bus_count(); ++k) {
            EXPECT_NEAR(std::abs(st.voltage[k]), std::abs(ref[k]), 1e-8) << "seed " << seed << " bus " << k;
        }
        EXPECT_LT(conservation_residual_pu(t, st, c.injections), 1e-9) << "seed " << seed;
    }
}

TEST(Bfs, ActivePowerConservesWithLosses) {
    const auto c = p2g::testkit::random_radial(99, 15);
    const RadialTopology t(c.network);
    const auto st = bfs_power_flow(t, c.injections);
    EXPECT_LT(conservation_residual_pu(t, st, c.injections), 1e-7);
    for (double l : st.feeder_losses_pu) EXPECT_GE(l, 0.0);
}

TEST(Bfs, DivergenceReportsResidualAndIterations) {
    const RadialTopology t(two_bus(0.5, 0.5));
    try {
        bfs_power_flow(t, std::vector<Complex>{{0, 0}, {-5.0, -2.0}}, {1e-8, 30});
        FAIL() << "expected PowerFlowError";
    } catch (const PowerFlowError& e) {
        EXPECT_EQ(e.iterations(), 30);
        EXPECT_GT(e.last_residual(), 1e-8);
    }
}

TEST(Bfs, RejectsBadInjections) {
    const RadialTopology t(two_bus(0.01, 0.01));
    EXPECT_THROW(bfs_power_flow(t, std::vector<Complex>(3)), std::invalid_argument);
    EXPECT_THROW(bfs_power_flow(t, std::vector<Complex>{{0, 0}, {NAN, 0}}), std::invalid_argument);
}

TEST(Units, KwPuRoundTrip) {
    const RadialTopology t(two_bus(0.01, 0.01));
    EXPECT_DOUBLE_EQ(t.kw_to_pu(1000.0), 0.1);
    EXPECT_DOUBLE_EQ(t.pu_to_kw(t.kw_to_pu(1234.5)), 1234.5);
}
