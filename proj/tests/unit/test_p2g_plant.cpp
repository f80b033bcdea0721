#include "p2gsim/p2g_plant.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace p2g::plant;

namespace {

constexpr double kDt = 0.25;

PlantConfig demo_plant() {
    PlantConfig c;
    c.name = "P";
    c.en_bus = 2;
    c.gn_node = 2;
    return c;
}

}  // namespace

TEST(Electrolyzer, GoldenOutput) {
    ElectrolyzerConfig c;
    c.specific_consumption_kwh_per_kg_h2 = 59.0;
    const auto out = electrolyzer_step(c, 1200.0, kDt);
    EXPECT_NEAR(out.h2_kg, 5.0, 1e-12);
    EXPECT_NEAR(out.o2_kg, 40.0, 1e-12);
    EXPECT_NEAR(out.heat_kwh, 15.0, 1e-12);
    EXPECT_DOUBLE_EQ(out.energy_kwh, 300.0);
}

TEST(Electrolyzer, StandbyProducesNothing) {
    ElectrolyzerConfig c;
    const auto out = electrolyzer_step(c, c.standby_power_kw, kDt);
    EXPECT_EQ(out.h2_kg, 0.0);
    EXPECT_DOUBLE_EQ(out.energy_kwh, c.standby_power_kw * kDt);
}

TEST(Electrolyzer, RejectsSetpointsOutsideRange) {
    ElectrolyzerConfig c;
    c.min_load_fraction = 0.1;
    EXPECT_THROW(electrolyzer_step(c, 1300.0, kDt), std::invalid_argument);
    EXPECT_THROW(electrolyzer_step(c, 60.0, kDt), std::invalid_argument);
    EXPECT_NO_THROW(electrolyzer_step(c, 120.0, kDt));
}

TEST(Electrolyzer, InversePower) {
    ElectrolyzerConfig c;
    for (double p : {20.0, 300.0, 1200.0}) {
        EXPECT_NEAR(electrolyzer_power_for(c, electrolyzer_step(c, p, kDt).h2_kg, kDt), p, 1e-9);
    }
}

TEST(Buffer, GoldenMass) {
    H2BufferConfig b;
    b.volume_m3 = 10.0;
    EXPECT_NEAR(buffer_mass_kg(b, 15.0), 12.413806801441988, 1e-12);
    EXPECT_NEAR(buffer_pressure_bar(b, buffer_mass_kg(b, 7.5)), 7.5, 1e-12);
}

TEST(Buffer, LedgerAndLimits) {
    H2BufferConfig b;
    H2BufferState s{buffer_mass_kg(b, 10.0)};
    const auto u = buffer_apply(s, b, 3.0, 1.0);
    EXPECT_DOUBLE_EQ(u.state.stored_mass_kg, s.stored_mass_kg + 2.0);
    EXPECT_THROW(buffer_apply(H2BufferState{buffer_mass_kg(b, 29.9)}, b, 50.0, 0.0), PlantModelError);
    EXPECT_THROW(buffer_apply(H2BufferState{buffer_mass_kg(b, 2.1)}, b, 0.0, 50.0), PlantModelError);
    EXPECT_THROW(buffer_apply(s, b, -1.0, 0.0), std::invalid_argument);
}

TEST(Methanation, StateMachineWithBalancing) {
    MethanationConfig c;
    MethState s;
    auto out = methanation_step(c, s, 0.0, kDt);
    EXPECT_EQ(out.state.mode, MethMode::HotStandby);

    out = methanation_step(c, s, 10.0, kDt);
    EXPECT_EQ(out.state.mode, MethMode::ReactorBalancing);
    EXPECT_EQ(out.h2_consumed_kg, 0.0);
    int balancing_steps = 1;
    while (out.state.mode == MethMode::ReactorBalancing && out.h2_consumed_kg == 0.0) {
        out = methanation_step(c, out.state, 10.0, kDt);
        ++balancing_steps;
    }
    EXPECT_EQ(balancing_steps, c.balancing_duration_steps + 1);
    EXPECT_EQ(out.state.mode, MethMode::UpAndRunning);
    EXPECT_NEAR(out.state.load_kg_per_h, c.ramp_up_kg_per_h2 * kDt, 1e-12);
}

TEST(Methanation, RampGolden) {
    MethanationConfig c;
    MethState s{MethMode::UpAndRunning, 10.0, 0};
    EXPECT_NEAR(methanation_step(c, s, 21.5, kDt).state.load_kg_per_h, 10.95, 1e-12);
    s.load_kg_per_h = 40.0;
    c.nominal_h2_intake_kg_per_h = 50.0;
    EXPECT_NEAR(methanation_step(c, s, 0.0, kDt).state.load_kg_per_h, 28.5, 1e-12);
}

TEST(Methanation, ProductsFollowLoad) {
    MethanationConfig c;
    const auto out = methanation_step(c, MethState{MethMode::UpAndRunning, 12.0, 0}, 12.0, kDt);
    EXPECT_DOUBLE_EQ(out.h2_consumed_kg, 3.0);
    EXPECT_DOUBLE_EQ(out.sng_kg, 6.0);
    EXPECT_DOUBLE_EQ(out.co2_t, 3.0 * 5.5 / 1000.0);
    EXPECT_DOUBLE_EQ(out.heat_kwh, 15.0);
}

TEST(Methanation, ShutdownReturnsToStandby) {
    MethanationConfig c;
    const auto out = methanation_step(c, MethState{MethMode::UpAndRunning, 5.0, 0}, 0.0, kDt);
    EXPECT_EQ(out.state, MethState{});
    EXPECT_EQ(out.h2_consumed_kg, 0.0);
}

TEST(Methanation, NoBalancingStartsImmediately) {
    MethanationConfig c;
    c.balancing_duration_steps = 0;
    EXPECT_TRUE(produces_this_step(c, MethState{}));
    const auto out = methanation_step(c, MethState{}, 20.0, kDt);
    EXPECT_EQ(out.state.mode, MethMode::UpAndRunning);
    EXPECT_GT(out.h2_consumed_kg, 0.0);
}

TEST(Commitment, ShutdownSeries) {
    MethanationConfig c;
    EXPECT_EQ(shutdown_commitment_kg(c, 0.0, kDt), 0.0);
    EXPECT_DOUBLE_EQ(shutdown_commitment_kg(c, 10.0, kDt), 2.5);
    EXPECT_DOUBLE_EQ(shutdown_commitment_kg(c, 21.5, kDt), (21.5 + 10.0) * kDt);
}

TEST(Commitment, FeasibleLoadKeepsBufferAbovePmin) {
    PlantConfig p = demo_plant();
    const auto& m = p.methanation;
    const MethState s{MethMode::UpAndRunning, 20.0, 0};
    const double floor = buffer_mass_kg(p.buffer, p.buffer.p_min_bar);
    const double hi = max_feasible_load(m, p.buffer, s, floor + 1000.0, kDt);
    EXPECT_DOUBLE_EQ(hi, 20.95);
    const double tight = max_feasible_load(m, p.buffer, s, floor + 6.0, kDt);
    EXPECT_LE(shutdown_commitment_kg(m, tight, kDt), 6.0 + 1e-9);
    EXPECT_GE(tight, min_reachable_load(m, s, kDt));
    EXPECT_EQ(max_feasible_load(m, p.buffer, MethState{}, floor + 100.0, kDt), 0.0);
}

TEST(PlantStep, BufferFullCapsElectrolyzer) {
    PlantConfig p = demo_plant();
    PlantState s = initial_state(p);
    s.buffer.stored_mass_kg = buffer_mass_kg(p.buffer, p.buffer.p_max_bar) - 1.0;
    const auto r = plant_step(p, s, 1200.0, 0.0, 2000.0, kDt);
    EXPECT_LT(r.effective_setpoint_kw, 1200.0);
    EXPECT_NEAR(r.h2_produced_kg, 1.0, 1e-9);
    EXPECT_NEAR(r.buffer_pressure_bar, p.buffer.p_max_bar, 1e-9);
}

TEST(PlantStep, AccountsSplitSurplusAndDeficit) {
    PlantConfig p = demo_plant();
    PlantState s = initial_state(p);
    const double m0 = s.buffer.stored_mass_kg;
    const auto r = plant_step(p, s, 800.0, 0.0, 500.0, kDt);
    EXPECT_DOUBLE_EQ(r.electricity_surplus_kwh, 125.0);
    EXPECT_DOUBLE_EQ(r.electricity_deficit_kwh, 75.0);
    EXPECT_NEAR(s.buffer.stored_mass_kg - m0, r.h2_produced_kg - r.h2_to_methanation_kg, 1e-12);
    EXPECT_DOUBLE_EQ(r.o2_t, 8.0 * r.h2_produced_kg / 1000.0);
}

TEST(PlantStep, MethanationDrawsFromBuffer) {
    PlantConfig p = demo_plant();
    PlantState s = initial_state(p);
    s.methanation = MethState{MethMode::UpAndRunning, 12.0, 0};
    s.buffer.stored_mass_kg = buffer_mass_kg(p.buffer, 20.0);
    const double m0 = s.buffer.stored_mass_kg;
    const auto r = plant_step(p, s, p.electrolyzer.standby_power_kw, 12.0, 0.0, kDt);
    EXPECT_DOUBLE_EQ(r.h2_to_methanation_kg, 3.0);
    EXPECT_DOUBLE_EQ(r.sng_kwh, 6.0 * 13.1);
    EXPECT_DOUBLE_EQ(s.buffer.stored_mass_kg, m0 - 3.0);
}

TEST(Validate, RejectsInconsistentConfig) {
    PlantConfig p = demo_plant();
    EXPECT_NO_THROW(validate(p));
    p.electrolyzer.specific_consumption_kwh_per_kg_h2 = 30.0;
    EXPECT_THROW(validate(p), std::invalid_argument);
    p = demo_plant();
    p.buffer.meth_trigger_bar = 40.0;
    EXPECT_THROW(validate(p), std::invalid_argument);
    p = demo_plant();
    p.initial.methanation.load_kg_per_h = 3.0;
    EXPECT_THROW(validate(p), std::invalid_argument);
    EXPECT_THROW(meth_mode_from_string("warm"), std::invalid_argument);
    EXPECT_EQ(meth_mode_from_string(to_string(MethMode::ReactorBalancing)), MethMode::ReactorBalancing);
}
